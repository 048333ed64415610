#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace corrsim::combinat {

// Outcome-sequence parities over symbols {0,1,2}:
//   f = XOR_i (s_i in {0,1}),  g = XOR_i (s_i in {1,2}).
// (f,g) is the Pauli byproduct label X^f Z^g of the sequence.

inline void require_symbol(int s) {
  if (s < 0 || s > 2) throw std::invalid_argument("outcome symbol must be in {0,1,2}");
}

inline int parity_f(const std::vector<int>& seq) {
  int p = 0;
  for (int s : seq) {
    require_symbol(s);
    p ^= (s == 0 || s == 1) ? 1 : 0;
  }
  return p;
}

inline int parity_g(const std::vector<int>& seq) {
  int p = 0;
  for (int s : seq) {
    require_symbol(s);
    p ^= (s == 1 || s == 2) ? 1 : 0;
  }
  return p;
}

/// Indicator of the all-2 sequence landing in sector (p,q): its parities are
/// f = 0, g = r mod 2, so h = delta_{p,0} delta_{q,0} for even r and
/// delta_{p,0} delta_{q,1} for odd r.
inline int h_indicator(int p, int q, int r) {
  if (r < 1) throw std::invalid_argument("h_indicator: r must be >= 1");
  if (r % 2 == 0) return (p == 0 && q == 0) ? 1 : 0;
  return (p == 0 && q == 1) ? 1 : 0;
}

enum class CountKind { U, S, T };

inline int64_t pow3(int r) {
  int64_t v = 1;
  for (int i = 0; i < r; ++i) v *= 3;
  return v;
}

namespace detail {
inline int64_t sign(int r) { return (r % 2 == 0) ? 1 : -1; }

inline int64_t count_u(int r, int p, int q) {
  // |U^r_{0,0}| = (3^r + 3(-1)^r)/4, the other three sectors share
  // (3^r - (-1)^r)/4.
  if (p == 0 && q == 0) return (pow3(r) + 3 * sign(r)) / 4;
  return (pow3(r) - sign(r)) / 4;
}

inline int64_t count_s(int r, int p, int q) {
  // all-2 sequence removed; base |S^2_{p,q}| = 2 for all sectors. The two
  // quarter terms are combined before dividing so the arithmetic stays exact.
  (void)q;
  if (p == 0) return (pow3(r) - 9 + sign(r) - 1) / 4 + 2;
  return (pow3(r) - 9 - sign(r) + 1) / 4 + 2;
}
}  // namespace detail

/// Closed-form sequence counts: U = all sequences with parities (p,q),
/// S = U minus the all-2 sequence, T = S restricted to first symbol i.
/// Exact integer arithmetic throughout.
inline int64_t count_closed(CountKind kind, int r, int p, int q, int i = -1) {
  if (p < 0 || p > 1 || q < 0 || q > 1)
    throw std::invalid_argument("count_closed: p,q must be bits");
  switch (kind) {
    case CountKind::U:
      if (r < 1) throw std::invalid_argument("count_closed: U needs r >= 1");
      return detail::count_u(r, p, q);
    case CountKind::S:
      if (r < 2) throw std::invalid_argument("count_closed: S needs r >= 2");
      return detail::count_s(r, p, q);
    case CountKind::T: {
      if (r < 2) throw std::invalid_argument("count_closed: T needs r >= 2");
      if (i < 0 || i > 2) throw std::invalid_argument("count_closed: T needs first symbol i in {0,1,2}");
      // Fixing the first symbol shifts the tail parities:
      //   |T^{r,0}_{p,q}| = |U^{r-1}_{p^1,q}|,
      //   |T^{r,1}_{p,q}| = |U^{r-1}_{p^1,q^1}|,
      //   |T^{r,2}_{p,q}| = |S^{r-1}_{p,q^1}|.
      if (i == 0) return detail::count_u(r - 1, p ^ 1, q);
      if (i == 1) return detail::count_u(r - 1, p ^ 1, q ^ 1);
      return detail::count_s(r - 1, p, q ^ 1);
    }
  }
  throw std::logic_error("count_closed: unreachable");
}

/// Brute-force count over {0,1,2}^r; the independent oracle for count_closed.
inline int64_t count_enumerate(CountKind kind, int r, int p, int q, int i = -1) {
  if (r < 1 || r > 14) throw std::invalid_argument("count_enumerate: r must be in 1..14");
  if (p < 0 || p > 1 || q < 0 || q > 1)
    throw std::invalid_argument("count_enumerate: p,q must be bits");
  if (kind == CountKind::T && (i < 0 || i > 2))
    throw std::invalid_argument("count_enumerate: T needs first symbol i in {0,1,2}");
  std::vector<int> seq(r, 0);
  int64_t count = 0;
  while (true) {
    bool all2 = true;
    for (int s : seq)
      if (s != 2) { all2 = false; break; }
    const bool excluded = (kind != CountKind::U) && all2;
    const bool first_ok = (kind != CountKind::T) || seq.front() == i;
    if (!excluded && first_ok && parity_f(seq) == p && parity_g(seq) == q) ++count;
    int pos = 0;
    while (pos < r && seq[pos] == 2) seq[pos++] = 0;
    if (pos == r) break;
    ++seq[pos];
  }
  return count;
}

struct CountTable {
  CountKind kind;
  int r = 0;
  std::string source;  // "closed_form" or "enumeration"
  // key (p, q, i); i = -1 for kinds U and S
  std::map<std::tuple<int, int, int>, int64_t> entries;
};

inline CountTable make_count_table(CountKind kind, int r, bool enumerated = false) {
  CountTable t{kind, r, enumerated ? "enumeration" : "closed_form", {}};
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      if (kind == CountKind::T) {
        for (int i = 0; i < 3; ++i)
          t.entries[{p, q, i}] = enumerated ? count_enumerate(kind, r, p, q, i)
                                            : count_closed(kind, r, p, q, i);
      } else {
        t.entries[{p, q, -1}] = enumerated ? count_enumerate(kind, r, p, q)
                                           : count_closed(kind, r, p, q);
      }
    }
  return t;
}

}  // namespace corrsim::combinat
