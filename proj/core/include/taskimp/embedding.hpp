#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "taskimp/vecindex.hpp"

namespace taskimp {

/// Seam for text embedding backends. Implementations must be deterministic:
/// identical text yields an identical vector.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dimension() const = 0;
    virtual EmbeddingVector embed(std::string_view text) const = 0;
};

/// Dependency-free fallback: lowercase, split on non-alphanumerics, FNV-1a
/// hash each token into one of `dimension` buckets with a sign taken from
/// the hash's top bit, accumulate counts, L2-normalize.
class HashedBagEmbedder final : public EmbeddingProvider {
public:
    explicit HashedBagEmbedder(std::size_t dimension = 384);

    std::size_t dimension() const override { return dimension_; }
    EmbeddingVector embed(std::string_view text) const override;

private:
    std::size_t dimension_;
};

struct HttpProviderOptions {
    std::string url;          // e.g. http://host:port/embed
    int timeout_ms = 2000;
    int retries = 2;
};

/// Remote embedding service: POST {"text": ...} -> {"vector": [f; d]}.
/// Failures after the configured retries surface as ProviderUnavailable.
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(HttpProviderOptions options, std::size_t dimension);

    std::size_t dimension() const override { return dimension_; }
    EmbeddingVector embed(std::string_view text) const override;

private:
    HttpProviderOptions options_;
    std::size_t dimension_;
};

/// Validates and embeds: rejects text that is empty after whitespace trim.
EmbeddingVector embed_text(const EmbeddingProvider& provider, std::string_view text);

}  // namespace taskimp
