#ifndef RIGIDITY_SHA1_HPP
#define RIGIDITY_SHA1_HPP

#include <string>

namespace rigidity {

/// SHA-1 hex digest of a byte string (config fingerprints for reports).
std::string sha1_hex(const std::string& data);

} // namespace rigidity

#endif
