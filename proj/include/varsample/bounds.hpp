#pragma once

#include "varsample/varieties.hpp"

#include <bit>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace varsample {

/// Number of 1 bits in the binary expansion of n.
inline int alpha(long long n) {
  if (n < 0) throw std::domain_error("alpha: n must be nonnegative");
  return std::popcount(static_cast<unsigned long long>(n));
}

struct BinaryProfile {
  long long n = 0;
  int alpha = 0;
};

inline BinaryProfile binary_profile(long long n) { return {n, alpha(n)}; }

/// Bit positions set in n, highest first.
inline std::vector<int> powers_of_two(long long n) {
  std::vector<int> out;
  for (int b = 62; b >= 0; --b)
    if ((n >> b) & 1LL) out.push_back(b);
  return out;
}

inline bool is_power_of_two(long long n) { return n > 0 && alpha(n) == 1; }

struct BoundsReport {
  std::string setting;  // sparse | low_rank | real_pr | complex_pr | standard_pr | generic_variety
  int d = 0;
  std::optional<int> param;
  std::optional<Field> field;
  long long lower = 1;
  long long upper = 1;
  std::optional<long long> exact;
  std::optional<long long> achievable;  // a known ensemble below the generic count
  std::string regime;
  std::optional<long long> codim_bad_set;
  std::vector<std::string> notes;

  bool consistent() const {
    if (lower > upper) return false;
    if (exact && (*exact < lower || *exact > upper)) return false;
    return true;
  }
};

/// Generic injectivity holds once m reaches dim W.
inline long long generic_minimum(long long dim_w) {
  if (dim_w < 0) throw std::domain_error("generic_minimum: negative dimension");
  return dim_w;
}

/// Codimension of the set of bad ensembles, m - dim W + 1.
inline long long codim_bad_set(long long m, long long dim_w) {
  if (m < dim_w) throw std::domain_error("codim_bad_set needs m >= dim W");
  return m - dim_w + 1;
}

inline BoundsReport generic_variety(long long dim_w, long long m) {
  BoundsReport r;
  r.setting = "generic_variety";
  r.upper = generic_minimum(dim_w);
  r.lower = std::min<long long>(1, r.upper);
  r.regime = "generic: m >= dim W";
  r.codim_bad_set = codim_bad_set(m, dim_w);
  r.notes.push_back("upper bound holds for generic ensembles; no lower bound is claimed for a general variety");
  return r;
}

inline BoundsReport sparse_minimal(int d, int k) {
  if (d < 1 || k < 0 || 2 * k > d) throw std::domain_error("sparse_minimal needs 0 <= 2k <= d");
  BoundsReport r;
  r.setting = "sparse";
  r.d = d;
  r.param = k;
  r.exact = dim_sparse(d, 2 * k);
  r.lower = r.upper = *r.exact;
  r.regime = "sparse: dim of 2k-sparse differences";
  if (k == 0) r.notes.push_back("k = 0: only the zero signal, no samples needed");
  return r;
}

inline BoundsReport lowrank_minimal(int d, int r, Field field) {
  if (d < 1 || r < 1 || 2 * r > d) throw std::domain_error("lowrank_minimal needs 1 <= r <= d/2");
  BoundsReport b;
  b.setting = "low_rank";
  b.d = d;
  b.param = r;
  b.field = field;
  const long long count = dim_low_rank(d, 2 * r);  // 4dr - 4r^2
  b.upper = count;
  if (field == Field::Complex) {
    b.lower = count;
    b.exact = count;
    b.regime = "low_rank complex: exact 4dr-4r^2";
    return b;
  }
  const long long gap = d - r;
  if (is_power_of_two(gap)) {
    b.lower = count;
    b.exact = count;
    b.regime = "low_rank real: d=2^k+r";
  } else if (d == 2 * r + 1) {
    b.lower = count;
    b.exact = count;
    b.regime = "low_rank real: d=2r+1";
  } else {
    b.regime = "low_rank real: generic upper 4dr-4r^2";
    b.notes.push_back("no lower bound claimed; tightness of 4dr-4r^2 over the reals is open for this (d, r)");
  }
  if (d == 4 && r == 1) {
    b.achievable = 11;
    b.notes.push_back("an explicit ensemble of 11 integer matrices is injective on real 4x4 rank-1 matrices");
  }
  return b;
}

inline BoundsReport real_pr_bounds(int d) {
  if (d < 2) throw std::domain_error("real_pr_bounds needs d >= 2");
  BoundsReport b;
  b.setting = "real_pr";
  b.d = d;
  const bool odd = d % 2 == 1;
  b.upper = odd ? 2LL * d - 1 : 2LL * d - 2;
  if (d >= 5) {
    const int lg = odd ? std::bit_width(static_cast<unsigned>(d - 1)) - 1 : std::bit_width(static_cast<unsigned>(d - 2)) - 1;
    b.lower = odd ? 2LL * d - 6LL * lg + 6 : 2LL * d - 6LL * lg + 4;
    b.regime = odd ? "real_pr: d odd >= 5 interval" : "real_pr: d even >= 5 interval";
  } else {
    b.lower = 1;
    b.regime = "real_pr: generic upper only";
    b.notes.push_back("no lower bound claimed for d < 5");
  }
  // d = 2^k + 1 or 2^k + 2 with k >= 1
  if (d - 1 >= 2 && is_power_of_two(d - 1)) {
    b.exact = 2LL * d - 1;
    b.regime = "real_pr: d=2^k+1";
  } else if (d - 2 >= 2 && is_power_of_two(d - 2)) {
    b.exact = 2LL * d - 2;
    b.regime = "real_pr: d=2^k+2";
  }
  return b;
}

/// Which exact family d belongs to for Hermitian complex phase retrieval,
/// found from the bit positions of d - 1 (or d - 2).
inline std::optional<std::pair<long long, std::string>> complex_pr_family(int d) {
  const auto bits = powers_of_two(d - 1);
  const bool bit0 = ((d - 1) & 1) != 0;
  if (d - 1 >= 4 && is_power_of_two(d - 1)) return std::pair{4LL * d - 4, std::string("complex_pr: d=2^k+1")};
  if (d - 2 >= 4 && is_power_of_two(d - 2)) return std::pair{4LL * d - 6, std::string("complex_pr: d=2^k+2")};
  if (bits.size() == 2 && !bit0) return std::pair{4LL * d - 5, std::string("complex_pr: d=2^k+2^j+1")};
  if (bits.size() == 3 && !bit0) return std::pair{4LL * d - 6, std::string("complex_pr: d=2^k+2^j+2^l+1")};
  return std::nullopt;
}

inline BoundsReport complex_pr_bounds(int d) {
  if (d < 2) throw std::domain_error("complex_pr_bounds needs d >= 2");
  BoundsReport b;
  b.setting = "complex_pr";
  b.d = d;
  if (d == 2) {
    b.lower = b.upper = 3;
    b.exact = 3;
    b.regime = "complex_pr: d=2";
    return b;
  }
  if (d <= 4) {
    b.lower = 1;
    b.upper = 4LL * d - 4;
    b.regime = "complex_pr: generic upper only";
    b.notes.push_back("interval formulas need d > 4; no lower bound claimed");
    return b;
  }
  const int a = alpha(d - 1);
  const bool odd = d % 2 == 1;
  int eps = 0;
  if (odd && a % 4 == 3) eps = 2;
  if (odd && a % 4 == 2) eps = 1;
  const int delta = odd ? 0 : 1;
  b.lower = 4LL * d - 2 - 2LL * a + eps;
  b.upper = 4LL * d - 3 - a - delta;
  b.regime = "complex_pr: interval";
  if (const auto fam = complex_pr_family(d)) {
    b.exact = fam->first;
    b.regime = fam->second;
  }
  return b;
}

/// Rank-one complex phase retrieval |<a_j, x>|^2 with vectors a_j.
inline BoundsReport standard_pr_facts(int d) {
  if (d < 2) throw std::domain_error("standard_pr_facts needs d >= 2");
  BoundsReport b;
  b.setting = "standard_pr";
  b.d = d;
  b.upper = 4LL * d - 4;
  b.lower = 4LL * d - 3 - 2LL * alpha(d - 1);
  b.regime = "standard_pr: generic 4d-4, lower 4d-3-2*alpha(d-1)";
  if (d - 1 >= 2 && is_power_of_two(d - 1)) {
    b.exact = 4LL * d - 4;
    b.regime = "standard_pr: d=2^k+1";
  }
  if (d == 4) {
    b.achievable = 11;
    b.notes.push_back("11 = 4d-5 vectors with the phase retrieval property are known for d = 4");
  }
  return b;
}

inline BoundsReport bounds_for(const std::string& setting, int d, int param = 0, Field field = Field::Complex) {
  if (setting == "complex_pr") return complex_pr_bounds(d);
  if (setting == "real_pr") return real_pr_bounds(d);
  if (setting == "standard_pr") return standard_pr_facts(d);
  if (setting == "sparse") return sparse_minimal(d, param);
  if (setting == "low_rank") return lowrank_minimal(d, param, field);
  throw std::invalid_argument("unknown bounds setting '" + setting + "'");
}

/// CSV rows d,lower,upper,exact,regime for d in [from, to]; exact is blank
/// when absent.
inline std::string bounds_sweep_csv(const std::string& setting, int from, int to, int param = 0,
                                    Field field = Field::Complex) {
  std::ostringstream out;
  out << "d,lower,upper,exact,regime\n";
  for (int d = from; d <= to; ++d) {
    const BoundsReport b = bounds_for(setting, d, param, field);
    out << d << ',' << b.lower << ',' << b.upper << ',';
    if (b.exact) out << *b.exact;
    out << ',' << b.regime << '\n';
  }
  return out.str();
}

}  // namespace varsample
