#pragma once

#include <string>

namespace fockblock::cli {

// Hex SHA-1 of "blob <size>\0" + content, as git hash-object computes it.
std::string git_blob_hash(const std::string& content);

}  // namespace fockblock::cli
