#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace ssmod {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

// Error kinds map onto CLI exit codes: Check -> 1, Config and Budget -> 2.
enum class ErrorKind { Config, Budget, Check, Internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what), kind_(kind), module_(module) {}
  ErrorKind kind() const { return kind_; }
  const std::string& module() const { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

[[noreturn]] inline void config_error(const std::string& module, const std::string& what) {
  throw Error(ErrorKind::Config, module, what);
}
[[noreturn]] inline void budget_error(const std::string& module, const std::string& what) {
  throw Error(ErrorKind::Budget, module, what);
}
[[noreturn]] inline void check_error(const std::string& module, const std::string& what) {
  throw Error(ErrorKind::Check, module, what);
}

// Multiplier applied to every enumeration cap; read from SSMOD_BUDGET.
inline double budget_factor() {
  const char* env = std::getenv("SSMOD_BUDGET");
  if (!env) return 1.0;
  char* end = nullptr;
  double v = std::strtod(env, &end);
  if (end == env || v < 1.0) return 1.0;
  return v;
}

inline u64 scaled_cap(u64 base) {
  double v = static_cast<double>(base) * budget_factor();
  if (v > 1.8e19) return UINT64_MAX;
  return static_cast<u64>(v);
}

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>((u128)a * b % m); }

inline u64 powmod(u64 a, u128 e, u64 m) {
  u64 r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

inline i64 mod_floor(i64 a, i64 m) {
  i64 r = a % m;
  return r < 0 ? r + m : r;
}

inline bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Prime factorization by trial division, as (prime, exponent) pairs.
inline std::vector<std::pair<u64, int>> factor_int(u64 n) {
  std::vector<std::pair<u64, int>> out;
  for (u64 d = 2; d * d <= n; ++d) {
    if (n % d) continue;
    int e = 0;
    while (n % d == 0) {
      n /= d;
      ++e;
    }
    out.push_back({d, e});
  }
  if (n > 1) out.push_back({n, 1});
  return out;
}

inline u64 ipow(u64 b, unsigned e) {
  u64 r = 1;
  while (e--) r *= b;
  return r;
}

inline u128 ipow128(u64 b, unsigned e) {
  u128 r = 1;
  while (e--) r *= b;
  return r;
}

// Inverse of a modulo m (gcd(a, m) = 1 required).
inline u64 invmod(u64 a, u64 m) {
  i64 t = 0, nt = 1;
  i64 r = static_cast<i64>(m), nr = static_cast<i64>(a % m);
  while (nr) {
    i64 q = r / nr;
    std::tie(t, nt) = std::make_pair(nt, t - q * nt);
    std::tie(r, nr) = std::make_pair(nr, r - q * nr);
  }
  if (r != 1) throw Error(ErrorKind::Internal, "util", "invmod of non-unit");
  return static_cast<u64>(mod_floor(t, static_cast<i64>(m)));
}

inline int valuation(u64 n, u64 p) {
  if (n == 0) return 1 << 20;
  int v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

inline std::vector<u64> parse_u64_list(const std::string& s) {
  std::vector<u64> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(std::stoull(cur));
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  return out;
}

}  // namespace ssmod
