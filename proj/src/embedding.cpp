#include "sentrep/embedding.hpp"

#include <cmath>
#include <sstream>

namespace sentrep {

std::string embed_mode_name(EmbedMode m) {
  return m == EmbedMode::learned ? "learned" : "fixed";
}

EmbedMode embed_mode_from_name(const std::string& name) {
  if (name == "learned") return EmbedMode::learned;
  if (name == "fixed") return EmbedMode::fixed;
  throw ValueError("unknown embedding mode '" + name + "'");
}

ExternalVectors ExternalVectors::parse(const std::string& text) {
  ExternalVectors ev;
  std::vector<std::string> lines = split_lines(text);
  size_t line_no = 0;
  for (const std::string& line : lines) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> vals;
    double x;
    while (ss >> x) vals.push_back(x);
    if (!ss.eof()) {
      throw IntegrityError("word vector line " + std::to_string(line_no) +
                           " has a non-numeric value");
    }
    // A bare "count dim" header may come first.
    if (ev.tokens.empty() && ev.width == 0 && vals.size() == 1 &&
        token.find_first_not_of("0123456789") == std::string::npos) {
      continue;
    }
    if (vals.empty()) {
      throw IntegrityError("word vector line " + std::to_string(line_no) +
                           " has no values");
    }
    if (ev.width == 0) ev.width = vals.size();
    if (vals.size() != ev.width) {
      throw IntegrityError("word vector line " + std::to_string(line_no) +
                           " has " + std::to_string(vals.size()) +
                           " values, expected " + std::to_string(ev.width));
    }
    if (ev.index.count(token)) {
      throw IntegrityError("duplicate word vector for token '" + token + "'");
    }
    ev.index.emplace(token, ev.tokens.size());
    ev.tokens.push_back(token);
    ev.data.insert(ev.data.end(), vals.begin(), vals.end());
  }
  if (ev.tokens.empty()) throw IntegrityError("word vector file has no rows");
  return ev;
}

ExternalVectors ExternalVectors::load(const std::string& path) {
  return parse(read_text_file(path));
}

const double* ExternalVectors::find(const std::string& token) const {
  auto it = index.find(token);
  return it == index.end() ? nullptr : row(it->second);
}

std::vector<double> LinearMap::apply(const double* u) const {
  std::vector<double> out(k, 0.0);
  for (size_t i = 0; i < k; ++i) {
    const double* mi = m.data() + i * kp;
    double acc = 0.0;
    for (size_t j = 0; j < kp; ++j) acc += mi[j] * u[j];
    out[i] = acc;
  }
  return out;
}

LinearMap fit_linear_map(const std::vector<std::vector<double>>& external,
                         const std::vector<std::vector<double>>& native,
                         double ridge_lambda) {
  if (external.empty() || external.size() != native.size()) {
    throw ValueError("linear map needs a non-empty, equal-length pair of vector lists");
  }
  size_t kp = external[0].size();
  size_t k = native[0].size();
  if (kp == 0 || k == 0) throw ValueError("linear map vectors must be non-empty");
  for (size_t p = 0; p < external.size(); ++p) {
    if (external[p].size() != kp || native[p].size() != k) {
      throw ValueError("inconsistent vector widths in linear map inputs at pair " +
                       std::to_string(p));
    }
  }
  double max_abs = 0.0;
  for (const auto& u : external) {
    for (double x : u) max_abs = std::max(max_abs, std::fabs(x));
  }
  if (max_abs == 0.0) {
    throw NumericError("linear map inputs are identically zero; the system is singular");
  }

  // Normal equations: (U^T U + lambda I) M^T = U^T V, one solve per output dim.
  std::vector<double> gram(kp * kp, 0.0);
  for (const auto& u : external) {
    for (size_t a = 0; a < kp; ++a) {
      for (size_t b = 0; b < kp; ++b) gram[a * kp + b] += u[a] * u[b];
    }
  }
  for (size_t a = 0; a < kp; ++a) gram[a * kp + a] += ridge_lambda;
  cholesky(gram, kp);

  LinearMap lm;
  lm.k = k;
  lm.kp = kp;
  lm.m.assign(k * kp, 0.0);
  std::vector<double> rhs(kp);
  for (size_t i = 0; i < k; ++i) {
    std::fill(rhs.begin(), rhs.end(), 0.0);
    for (size_t p = 0; p < external.size(); ++p) {
      double vi = native[p][i];
      for (size_t j = 0; j < kp; ++j) rhs[j] += external[p][j] * vi;
    }
    cholesky_solve(gram, kp, rhs);
    std::copy(rhs.begin(), rhs.end(), lm.m.begin() + i * kp);
  }

  double err = 0.0;
  for (size_t p = 0; p < external.size(); ++p) {
    std::vector<double> pred = lm.apply(external[p].data());
    for (size_t i = 0; i < k; ++i) {
      double d = pred[i] - native[p][i];
      err += d * d;
    }
  }
  lm.residual = err / static_cast<double>(external.size());
  return lm;
}

std::vector<double> expand_token(const std::string& token,
                                 const ExternalVectors& ext,
                                 const LinearMap* map,
                                 const std::vector<double>& unk_vec,
                                 ExpandStats* stats) {
  const double* u = ext.find(token);
  if (!u) {
    if (stats) {
      ++stats->missing;
      stats->missing_tokens.push_back(token);
    }
    return unk_vec;
  }
  if (map) {
    if (map->kp != ext.width || map->k != unk_vec.size()) {
      throw ShapeError("linear map is " + std::to_string(map->k) + "x" +
                       std::to_string(map->kp) + " but the vectors are width " +
                       std::to_string(ext.width) + " -> " +
                       std::to_string(unk_vec.size()));
    }
    if (stats) ++stats->mapped;
    return map->apply(u);
  }
  if (ext.width != unk_vec.size()) {
    throw ShapeError("cannot copy width-" + std::to_string(ext.width) +
                     " external vectors into a width-" +
                     std::to_string(unk_vec.size()) +
                     " embedding without a linear map");
  }
  if (stats) ++stats->copied;
  return std::vector<double>(u, u + ext.width);
}

}  // namespace sentrep
