#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "taskimp/errors.hpp"

namespace taskimp {

/// L2-normalized embedding. Construct through normalized() so the unit-norm
/// invariant holds.
class EmbeddingVector {
public:
    EmbeddingVector() = default;

    static EmbeddingVector normalized(std::vector<float> values);

    const std::vector<float>& values() const { return values_; }
    std::size_t dimension() const { return values_.size(); }

private:
    explicit EmbeddingVector(std::vector<float> v) : values_(std::move(v)) {}
    std::vector<float> values_;
};

/// Cosine similarity, accumulated in double precision.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct SearchHit {
    std::string id;
    double score = 0.0;  // cosine in [-1, 1]
};

/// Exact (exhaustive) flat index. Build-then-freeze: add entries up front,
/// then search concurrently.
class FlatIndex {
public:
    explicit FlatIndex(std::size_t dimension) : dimension_(dimension) {}

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return entries_.size(); }

    void add(const std::string& id, EmbeddingVector vector);

    /// Top-k by descending cosine; ties broken by insertion order.
    std::vector<SearchHit> search(const EmbeddingVector& query, std::size_t k) const;

    struct Entry {
        std::string id;
        EmbeddingVector vector;
    };
    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::size_t dimension_;
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace taskimp
