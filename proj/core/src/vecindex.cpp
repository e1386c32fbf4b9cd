#include "taskimp/vecindex.hpp"

#include <algorithm>
#include <cmath>

namespace taskimp {

EmbeddingVector EmbeddingVector::normalized(std::vector<float> values) {
    double sq = 0.0;
    for (float v : values) {
        if (!std::isfinite(v)) throw ValidationError("embedding has non-finite entries");
        sq += static_cast<double>(v) * v;
    }
    if (sq == 0.0) throw ValidationError("cannot normalize a zero embedding");
    const double inv = 1.0 / std::sqrt(sq);
    for (float& v : values) v = static_cast<float>(v * inv);
    return EmbeddingVector(std::move(values));
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) {
        throw DimensionMismatch("cosine of vectors with dimensions " +
                                std::to_string(a.dimension()) + " and " +
                                std::to_string(b.dimension()));
    }
    double dot = 0.0;
    const auto& av = a.values();
    const auto& bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) {
        dot += static_cast<double>(av[i]) * bv[i];
    }
    return dot;
}

void FlatIndex::add(const std::string& id, EmbeddingVector vector) {
    if (by_id_.count(id)) throw DuplicateId("index already contains id '" + id + "'");
    if (vector.dimension() != dimension_) {
        throw DimensionMismatch("vector dimension " + std::to_string(vector.dimension()) +
                                " does not match index dimension " + std::to_string(dimension_));
    }
    by_id_.emplace(id, entries_.size());
    entries_.push_back({id, std::move(vector)});
}

std::vector<SearchHit> FlatIndex::search(const EmbeddingVector& query, std::size_t k) const {
    if (entries_.empty()) throw EmptyIndex();
    if (k == 0) throw ValidationError("k must be positive");
    if (query.dimension() != dimension_) {
        throw DimensionMismatch("query dimension " + std::to_string(query.dimension()) +
                                " does not match index dimension " + std::to_string(dimension_));
    }
    std::vector<SearchHit> hits;
    hits.reserve(entries_.size());
    for (const auto& e : entries_) {
        hits.push_back({e.id, cosine(query, e.vector)});
    }
    // stable sort preserves insertion order among equal scores
    std::stable_sort(hits.begin(), hits.end(),
                     [](const SearchHit& a, const SearchHit& b) { return a.score > b.score; });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

}  // namespace taskimp
