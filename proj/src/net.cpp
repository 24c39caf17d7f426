#include "athena/net.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <openssl/evp.h>

namespace athena::net {

ParsedUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("URL without scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string url_encode(const std::string& text) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xF];
        }
    }
    return out;
}

std::string sha256_hex(const std::string& data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

HttpResponse LiveTransport::send(const HttpRequest& request, std::chrono::milliseconds timeout) {
    auto parts = split_url(request.url);
    httplib::Client client(parts.scheme_host_port);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_follow_location(true);

    httplib::Headers headers(request.headers.begin(), request.headers.end());
    httplib::Result res = [&] {
        if (request.method == "POST") {
            auto type = request.headers.count("Content-Type") ? request.headers.at("Content-Type")
                                                              : std::string("application/json");
            return client.Post(parts.path_and_query, headers, request.body, type);
        }
        return client.Get(parts.path_and_query, headers);
    }();
    if (!res) {
        auto err = res.error();
        auto code = (err == httplib::Error::Read || err == httplib::Error::Write ||
                     err == httplib::Error::ConnectionTimeout)
                        ? NetError::Code::Timeout
                        : NetError::Code::Unreachable;
        throw NetError(code, "request to " + parts.scheme_host_port + " failed: " + httplib::to_string(err));
    }
    return {res->status, res->body};
}

FixtureTransport::FixtureTransport(std::filesystem::path dir, FixtureMode mode, std::shared_ptr<HttpTransport> inner)
    : dir_(std::move(dir)), mode_(mode), inner_(std::move(inner)) {
    if (mode_ == FixtureMode::Record && !inner_) inner_ = std::make_shared<LiveTransport>();
}

std::filesystem::path FixtureTransport::fixture_path(const HttpRequest& request) const {
    const std::string& key = request.fixture_key.empty() ? request.url : request.fixture_key;
    return dir_ / (sha256_hex(request.method + "\n" + key) + ".body");
}

HttpResponse FixtureTransport::send(const HttpRequest& request, std::chrono::milliseconds timeout) {
    auto path = fixture_path(request);
    if (mode_ == FixtureMode::Replay) {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw NetError(NetError::Code::MissingFixture,
                           "no recorded fixture for " + request.method + " " + request.fixture_key + " (" +
                               path.filename().string() + ")");
        std::stringstream body;
        body << in.rdbuf();
        return {200, body.str()};
    }
    auto response = inner_->send(request, timeout);
    if (response.status >= 200 && response.status < 300) {
        std::filesystem::create_directories(dir_);
        std::ofstream(path, std::ios::binary) << response.body;
    }
    return response;
}

}  // namespace athena::net
