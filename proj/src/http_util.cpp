#include "askdata/http_util.hpp"

#include "askdata/error.hpp"

namespace askdata {

HttpEndpoint split_url(std::string_view url) {
    size_t scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) throw Error(ErrorKind::InvalidArgument, "not a URL: " + std::string(url));
    std::string_view scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw Error(ErrorKind::InvalidArgument, "unsupported URL scheme: " + std::string(url));
    }
    size_t path_begin = url.find('/', scheme_end + 3);
    HttpEndpoint e;
    e.origin = std::string(url.substr(0, path_begin));
    if (path_begin != std::string_view::npos) e.path = std::string(url.substr(path_begin));
    while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
    return e;
}

}  // namespace askdata
