#include "multicoh/io.hpp"

#include <openssl/sha.h>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "multicoh/errors.hpp"

namespace multicoh {

namespace {

constexpr std::string_view kLayerHeader = "# multicoh layer v1 n=";
constexpr std::string_view kLatentsHeader = "# multicoh latents v1 n=";

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw IoError("line " + std::to_string(line) + ": " + what);
}

template <class T>
bool parse_number(std::string_view s, T& value) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

// Splits "a<TAB>b" into two fields.
bool split_tab(std::string_view line, std::string_view& a, std::string_view& b) {
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos) return false;
  a = line.substr(0, tab);
  b = line.substr(tab + 1);
  return b.find('\t') == std::string_view::npos;
}

std::size_t parse_size_after(std::string_view text, std::string_view prefix,
                             std::size_t line) {
  if (text.substr(0, prefix.size()) != prefix) {
    parse_error(line, "expected '" + std::string(prefix) + "'");
  }
  std::size_t v = 0;
  if (!parse_number(text.substr(prefix.size()), v)) {
    parse_error(line, "malformed count in '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_layer(std::ostream& out, const Adjacency& layer) {
  out << kLayerHeader << layer.nodes() << '\n';
  for (const auto& [i, j] : layer.edges()) {
    out << i + 1 << '\t' << j + 1 << '\n';
  }
}

Adjacency read_layer(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty layer file");
  const std::size_t n = parse_size_after(line, kLayerHeader, 1);
  Adjacency layer(n);
  std::size_t prev_i = 0, prev_j = 0;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      parse_error(lineno, "blank line");
    }
    std::string_view a, b;
    std::size_t i = 0, j = 0;
    if (!split_tab(line, a, b) || !parse_number(a, i) || !parse_number(b, j)) {
      parse_error(lineno, "expected 'i<TAB>j', got '" + line + "'");
    }
    if (i < 1 || j > n || i >= j) {
      parse_error(lineno, "pair (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") violates 1 <= i < j <= " +
                              std::to_string(n));
    }
    if (std::pair(i, j) <= std::pair(prev_i, prev_j)) {
      parse_error(lineno, "pairs must be sorted and unique");
    }
    prev_i = i;
    prev_j = j;
    layer.set(i - 1, j - 1);
  }
  return layer;
}

void write_latents(std::ostream& out, const Latents& latents) {
  out << kLatentsHeader << latents.size();
  if (latents.has_labels()) {
    out << " kind=z K=" << latents.blocks() << '\n';
    const auto& z = latents.z();
    for (std::size_t i = 0; i < z.size(); ++i) {
      out << i + 1 << '\t' << z[i] + 1 << '\n';
    }
  } else {
    out << " kind=xi\n";
    const auto& xi = latents.xi();
    for (std::size_t i = 0; i < xi.size(); ++i) {
      out << i + 1 << '\t' << format_double(xi[i]) << '\n';
    }
  }
}

Latents read_latents(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty latents file");
  std::istringstream hs(header.substr(std::min(header.size(),
                                               kLatentsHeader.size())));
  if (header.substr(0, kLatentsHeader.size()) != kLatentsHeader) {
    parse_error(1, "expected '" + std::string(kLatentsHeader) + "'");
  }
  std::string n_text, kind, k_text;
  hs >> n_text >> kind >> k_text;
  std::size_t n = 0;
  if (!parse_number(std::string_view(n_text), n)) {
    parse_error(1, "malformed node count");
  }
  const bool labels = kind == "kind=z";
  if (!labels && kind != "kind=xi") parse_error(1, "unknown latent kind");
  std::size_t k = 0;
  if (labels) k = parse_size_after(k_text, "K=", 1);

  std::vector<double> xi;
  std::vector<int> z;
  std::string line;
  std::size_t lineno = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    ++lineno;
    if (!std::getline(in, line)) parse_error(lineno, "missing entries");
    std::string_view a, b;
    std::size_t idx = 0;
    if (!split_tab(line, a, b) || !parse_number(a, idx) || idx != i) {
      parse_error(lineno, "expected '" + std::to_string(i) + "<TAB>value'");
    }
    if (labels) {
      int v = 0;
      if (!parse_number(b, v) || v < 1 || static_cast<std::size_t>(v) > k) {
        parse_error(lineno, "label outside 1.." + std::to_string(k));
      }
      z.push_back(v - 1);
    } else {
      double v = 0;
      if (!parse_number(b, v) || !(v >= 0.0 && v <= 1.0)) {
        parse_error(lineno, "position outside [0, 1]");
      }
      xi.push_back(v);
    }
  }
  return labels ? Latents::labels(std::move(z), k)
                : Latents::positions(std::move(xi));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(),
         digest);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : digest) {
    out += kHex[c >> 4];
    out += kHex[c & 15];
  }
  return out;
}

}  // namespace multicoh
