#include "taskimp/embedding.hpp"

#include "httplib.h"
#include "json.hpp"

namespace taskimp {

using nlohmann::json;

namespace {

/// Splits "http://host:port/path" into origin and path for cpp-httplib.
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw ValidationError("provider url must start with http:// or https://: " + url);
    }
    const auto path_start = url.find('/', scheme + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpProviderOptions options, std::size_t dimension)
    : options_(std::move(options)), dimension_(dimension) {
    split_url(options_.url);  // validate early
    if (dimension_ == 0) throw ValidationError("embedding dimension must be positive");
}

EmbeddingVector HttpEmbeddingProvider::embed(std::string_view text) const {
    const auto [origin, path] = split_url(options_.url);
    httplib::Client client(origin);
    client.set_connection_timeout(0, options_.timeout_ms * 1000);
    client.set_read_timeout(0, options_.timeout_ms * 1000);

    json body;
    body["text"] = std::string(text);
    const std::string payload = body.dump();

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
        auto res = client.Post(path, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "http status " + std::to_string(res->status);
            continue;
        }
        try {
            const json doc = json::parse(res->body);
            std::vector<float> values = doc.at("vector").get<std::vector<float>>();
            if (values.size() != dimension_) {
                throw ProviderUnavailable("remote embedding dimension " +
                                          std::to_string(values.size()) + " does not match " +
                                          std::to_string(dimension_));
            }
            return EmbeddingVector::normalized(std::move(values));
        } catch (const json::exception& e) {
            last_error = std::string("malformed response: ") + e.what();
        }
    }
    throw ProviderUnavailable("embedding service at " + options_.url +
                              " unavailable after " + std::to_string(options_.retries + 1) +
                              " attempts (" + last_error + ")");
}

}  // namespace taskimp
