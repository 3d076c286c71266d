#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "multicoh/sample.hpp"

namespace multicoh {

// Layer edge list:
//   # multicoh layer v1 n=<n>
//   i<TAB>j        (1 <= i < j <= n, strictly increasing in (i, j))
void write_layer(std::ostream& out, const Adjacency& layer);
Adjacency read_layer(std::istream& in);

// Latents:
//   # multicoh latents v1 n=<n> kind=xi
//   # multicoh latents v1 n=<n> kind=z K=<K>
//   i<TAB>value    (i 1-based; xi in shortest round-trip form, z 1-based)
void write_latents(std::ostream& out, const Latents& latents);
Latents read_latents(std::istream& in);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view bytes);

}  // namespace multicoh
