#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

namespace athena::net {

struct HttpRequest {
    std::string method = "GET";
    std::string url;  // absolute, scheme://host[:port]/path?query
    std::map<std::string, std::string> headers;
    std::string body;
    /// Identity of the request for fixture lookup. Must not contain secrets;
    /// clients build it from the request with credentials stripped.
    std::string fixture_key;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

class NetError : public std::runtime_error {
public:
    enum class Code { Timeout, Unreachable, MissingFixture };

    NetError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse send(const HttpRequest& request, std::chrono::milliseconds timeout) = 0;
    /// Replaying transports answer from disk and need no credentials.
    virtual bool needs_credentials() const { return true; }
};

class LiveTransport final : public HttpTransport {
public:
    HttpResponse send(const HttpRequest& request, std::chrono::milliseconds timeout) override;
};

enum class FixtureMode { Replay, Record };

/// Directory of recorded response bodies, one file per request named
/// "<sha256(fixture_key)>.body". Replay serves them; Record forwards to the
/// inner transport and writes successful bodies.
class FixtureTransport final : public HttpTransport {
public:
    FixtureTransport(std::filesystem::path dir, FixtureMode mode, std::shared_ptr<HttpTransport> inner = nullptr);

    HttpResponse send(const HttpRequest& request, std::chrono::milliseconds timeout) override;
    bool needs_credentials() const override { return mode_ == FixtureMode::Record; }

    std::filesystem::path fixture_path(const HttpRequest& request) const;

private:
    std::filesystem::path dir_;
    FixtureMode mode_;
    std::shared_ptr<HttpTransport> inner_;
};

std::string sha256_hex(const std::string& data);
std::string url_encode(const std::string& text);

struct ParsedUrl {
    std::string scheme_host_port;  // "https://api.example.com:443"
    std::string path_and_query;    // "/v1/x?y=1"
};

ParsedUrl split_url(const std::string& url);

}  // namespace athena::net
