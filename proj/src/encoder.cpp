#include "caproute/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "caproute/errors.hpp"
#include "caproute/rng.hpp"

namespace caproute {

double FeatureVector::l2_norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

std::vector<uint32_t> FeatureVector::nonzero_indices() const {
  std::vector<uint32_t> nz;
  for (uint32_t i = 0; i < values.size(); ++i)
    if (values[i] != 0.0) nz.push_back(i);
  return nz;
}

double cosine(const FeatureVector& a, const FeatureVector& b) {
  if (a.values.size() != b.values.size()) throw DataError("cosine: dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  double na = a.l2_norm(), nb = b.l2_norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (na * nb);
}

namespace {

constexpr uint64_t kTokenSalt = 0x746f6b656e5f5f31ull;
constexpr uint64_t kKeywordSalt = 0x6b775f6275636b31ull;
constexpr uint64_t kNgramSalt = 0x6e6772616d5f5f31ull;

/// Signed feature hashing: bit 63 picks the sign, the rest the bucket.
/// Contributions are integers, so accumulation order cannot change the sum.
inline void add_feature(std::vector<double>& values, uint64_t hash) {
  std::size_t idx = static_cast<std::size_t>(hash % values.size());
  values[idx] += (hash >> 63) ? 1.0 : -1.0;
}

void normalize(FeatureVector& fv) {
  double norm = fv.l2_norm();
  if (norm == 0.0) return;
  for (double& v : fv.values) v /= norm;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

/// Lowercased whitespace tokens with non-alphanumeric edges stripped.
std::vector<std::string> line_tokens(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i == start) continue;
    std::size_t lo = start, hi = i;
    while (lo < hi && !std::isalnum(static_cast<unsigned char>(line[lo]))) ++lo;
    while (hi > lo && !std::isalnum(static_cast<unsigned char>(line[hi - 1]))) --hi;
    if (hi > lo) out.push_back(lowercase(line.substr(lo, hi - lo)));
  }
  return out;
}

/// Parse "... accuracy {pct}% ... '{kw1}, {kw2}, ...'" out of one rendered
/// line. Returns false when the line does not carry both pieces.
bool parse_capability_line(std::string_view line, double& accuracy,
                           std::vector<std::string>& keywords) {
  static constexpr std::string_view kMarker = "accuracy ";
  std::size_t at = line.find(kMarker);
  if (at == std::string_view::npos) return false;
  std::size_t num_start = at + kMarker.size();
  std::size_t pct = line.find('%', num_start);
  if (pct == std::string_view::npos || pct == num_start) return false;
  try {
    accuracy = std::stod(std::string(line.substr(num_start, pct - num_start))) / 100.0;
  } catch (...) {
    return false;
  }

  std::size_t quote_open = line.find('\'', pct);
  if (quote_open == std::string_view::npos) return false;
  std::size_t quote_close = line.rfind('\'');
  if (quote_close <= quote_open) return false;
  std::string_view inside = line.substr(quote_open + 1, quote_close - quote_open - 1);

  keywords.clear();
  std::size_t pos = 0;
  while (pos <= inside.size()) {
    std::size_t comma = inside.find(", ", pos);
    std::string_view kw =
        comma == std::string_view::npos ? inside.substr(pos) : inside.substr(pos, comma - pos);
    if (!kw.empty()) keywords.push_back(lowercase(kw));
    if (comma == std::string_view::npos) break;
    pos = comma + 2;
  }
  return !keywords.empty();
}

}  // namespace

FeatureVector encode_capability(std::string_view text, int dim) {
  if (dim < 64) throw DataError("capability encoder: dimension must be >= 64");
  FeatureVector fv;
  fv.values.assign(static_cast<std::size_t>(dim), 0.0);

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        eol == std::string_view::npos ? text.substr(pos) : text.substr(pos, eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (line.empty()) continue;

    for (const auto& tok : line_tokens(line)) add_feature(fv.values, fnv1a64(tok, kTokenSalt));

    double accuracy = 0.0;
    std::vector<std::string> keywords;
    if (parse_capability_line(line, accuracy, keywords)) {
      long bucket = std::lround(accuracy * 20.0);  // 5% steps
      for (const auto& kw : keywords) {
        uint64_t h = fnv1a64(kw, kKeywordSalt);
        h = fnv1a64(std::to_string(bucket), h);
        add_feature(fv.values, h);
      }
    }
  }
  normalize(fv);
  return fv;
}

FeatureVector encode_instruction(std::string_view text, int dim) {
  if (dim < 64) throw DataError("instruction encoder: dimension must be >= 64");
  FeatureVector fv;
  fv.values.assign(static_cast<std::size_t>(dim), 0.0);

  std::string lower = lowercase(text);
  for (std::size_t n = 3; n <= 5; ++n) {
    if (lower.size() < n) break;
    for (std::size_t i = 0; i + n <= lower.size(); ++i)
      add_feature(fv.values, fnv1a64(std::string_view(lower).substr(i, n), kNgramSalt ^ n));
  }
  normalize(fv);
  return fv;
}

}  // namespace caproute
