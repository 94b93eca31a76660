#pragma once

#include <stdexcept>
#include <string>

namespace adacache {

// Invalid user-supplied configuration (bad codebook, bad config file, ...).
// what() carries the offending field path where one exists, e.g. "model.channels: ...".
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem-level failures (unwritable output dir, truncated latent file, ...).
struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace adacache
