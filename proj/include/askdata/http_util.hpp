#pragma once

#include <string>
#include <string_view>

namespace askdata {

struct HttpEndpoint {
    /// scheme://host[:port]
    std::string origin;
    /// Path prefix without a trailing slash, possibly empty.
    std::string path;
};

/// Throws Error(InvalidArgument) for anything but an http(s) URL.
HttpEndpoint split_url(std::string_view url);

}  // namespace askdata
