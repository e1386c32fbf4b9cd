#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "taskimp/perception.hpp"

namespace taskimp {

using nlohmann::json;

namespace {

std::string base64_encode(const std::string& data) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < data.size()) {
        const unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                           (static_cast<unsigned char>(data[i + 1]) << 8) |
                           static_cast<unsigned char>(data[i + 2]);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back(alphabet[v & 63]);
        i += 3;
    }
    if (i + 1 == data.size()) {
        const unsigned v = static_cast<unsigned char>(data[i]) << 16;
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == data.size()) {
        const unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                           (static_cast<unsigned char>(data[i + 1]) << 8);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw ValidationError("vlm url must start with http:// or https://: " + url);
    }
    const auto path_start = url.find('/', scheme + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string image_payload(const ImageRef& image) {
    std::ifstream in(image.uri, std::ios::binary);
    if (in) {
        std::stringstream ss;
        ss << in.rdbuf();
        return base64_encode(ss.str());
    }
    return base64_encode(image.uri);
}

}  // namespace

HttpVlmClient::HttpVlmClient(HttpVlmOptions options) : options_(std::move(options)) {
    split_url(options_.url);  // validate early
}

VlmAnswer HttpVlmClient::ask(const ImageRef& image, const std::string& question) {
    const auto [origin, path] = split_url(options_.url);
    httplib::Client client(origin);
    client.set_connection_timeout(0, options_.timeout_ms * 1000);
    client.set_read_timeout(0, options_.timeout_ms * 1000);

    json body;
    body["image_b64"] = image_payload(image);
    body["question"] = question;
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
            return vlm_answer_from_string(doc.at("answer").get<std::string>());
        } catch (const json::exception& e) {
            last_error = std::string("malformed response: ") + e.what();
        }
    }
    throw ProviderUnavailable("vlm service at " + options_.url + " unavailable after " +
                              std::to_string(options_.retries + 1) + " attempts (" + last_error +
                              ")");
}

}  // namespace taskimp
