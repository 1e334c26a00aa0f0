#pragma once

// Shared fixtures and independent reference implementations for the tests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <unistd.h>
#include <string>
#include <vector>

namespace ortus::testkit {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(ORTUS_DATA_DIR) / name;
}

// Fresh empty directory under the system temp dir, unique per call.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static int counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("ortus_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Straight from the definition: cosine of the angle between the post window
// and the lagged partner window, with the zero-norm guard.
inline double oracle_xcorr(const std::vector<double>& post, const std::vector<double>& pre,
                           std::size_t lag, std::size_t window) {
  std::vector<double> a(post.begin(), post.begin() + static_cast<long>(window));
  std::vector<double> b(pre.begin() + static_cast<long>(lag),
                        pre.begin() + static_cast<long>(lag + window));
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < window; ++k) {
    ab += static_cast<long double>(a[k]) * b[k];
    aa += static_cast<long double>(a[k]) * a[k];
    bb += static_cast<long double>(b[k]) * b[k];
  }
  if (std::sqrt(aa) < 1e-12L || std::sqrt(bb) < 1e-12L) return 0.0;
  return static_cast<double>(ab / (std::sqrt(aa) * std::sqrt(bb)));
}

// Least squares via the normal equations on time coordinates that run
// forward toward the present: sample h[t+k] sits at time -k.
inline double oracle_slope(const std::vector<double>& h, std::size_t t, std::size_t u) {
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const long double n = static_cast<long double>(u + 1);
  for (std::size_t k = 0; k <= u; ++k) {
    const long double x = -static_cast<long double>(k);
    const long double y = h[t + k];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return static_cast<double>((n * sxy - sx * sy) / (n * sxx - sx * sx));
}

inline std::vector<double> random_history(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> h(n);
  for (auto& v : h) v = dist(rng);
  return h;
}

// Subsets of {0..n-1} as sorted index lists, enumerated by recursion rather
// than bit masks.
inline void enumerate_subsets(std::size_t n, std::size_t from, std::vector<std::size_t>& cur,
                              std::vector<std::vector<std::size_t>>& out) {
  for (std::size_t i = from; i < n; ++i) {
    cur.push_back(i);
    out.push_back(cur);
    enumerate_subsets(n, i + 1, cur, out);
    cur.pop_back();
  }
}

inline std::vector<std::vector<std::size_t>> nonempty_subsets(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  enumerate_subsets(n, 0, cur, out);
  return out;
}

// An .ort text with `sensors` sensory elements s0.., the given emotions, and
// one motor driven by the first sensor's relay.
inline std::string synthetic_ort(std::size_t sensors, const std::vector<std::string>& emotions,
                                 const std::string& extra_relationships = "") {
  std::string out;
  for (std::size_t i = 0; i < sensors; ++i)
    out += "element sS" + std::to_string(i) + " { type: sensory }\n";
  for (std::size_t e = 0; e < emotions.size(); ++e)
    out += "element " + emotions[e] + " { type: emotion affect: " +
           (e % 2 == 0 ? "negative" : "positive") + " }\n";
  out += "element mOUT { type: motor }\n";
  out += "relationship { +isS0 causes +mOUT }\n";
  out += extra_relationships;
  return out;
}

}  // namespace ortus::testkit
