#include "taskimp/embedding.hpp"

#include <cctype>

#include "taskimp/hashing.hpp"

namespace taskimp {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

HashedBagEmbedder::HashedBagEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw ValidationError("embedding dimension must be positive");
}

EmbeddingVector HashedBagEmbedder::embed(std::string_view text) const {
    std::vector<float> acc(dimension_, 0.0f);
    bool any_token = false;
    auto bump = [&](std::string_view token) {
        const std::uint64_t h = fnv1a64(token);
        const std::size_t bucket = h % dimension_;
        acc[bucket] += (h >> 63) ? -1.0f : 1.0f;
        any_token = true;
    };

    std::string token;
    for (char c : text) {
        const unsigned char uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) {
            token.push_back(static_cast<char>(std::tolower(uc)));
        } else if (!token.empty()) {
            bump(token);
            token.clear();
        }
    }
    if (!token.empty()) bump(token);

    if (!any_token) {
        // No alphanumeric runs: hash the trimmed text as a single token so
        // the output stays deterministic and nonzero.
        std::string whole(trim(text));
        for (char& c : whole) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        bump(whole);
    }
    return EmbeddingVector::normalized(std::move(acc));
}

EmbeddingVector embed_text(const EmbeddingProvider& provider, std::string_view text) {
    if (trim(text).empty()) throw EmptyText();
    return provider.embed(text);
}

}  // namespace taskimp
