#include "dav/intlinalg.hpp"

#include <cstdlib>

namespace dav {

namespace {

void check64(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw Error("integer overflow in diagonalization");
}

// row[i] -= q * row[k]
void row_op(IntMatrix3& m, int i, int k, std::int64_t q) {
  for (int j = 0; j < 3; ++j) {
    __int128 v = static_cast<__int128>(m.a[i][j]) - static_cast<__int128>(q) * m.a[k][j];
    check64(v);
    m.a[i][j] = static_cast<std::int64_t>(v);
  }
}

// col[j] -= q * col[k], mirrored into R
void col_op(IntMatrix3& m, IntMatrix3& r, int j, int k, std::int64_t q) {
  for (int i = 0; i < 3; ++i) {
    __int128 v = static_cast<__int128>(m.a[i][j]) - static_cast<__int128>(q) * m.a[i][k];
    check64(v);
    m.a[i][j] = static_cast<std::int64_t>(v);
    v = static_cast<__int128>(r.a[i][j]) - static_cast<__int128>(q) * r.a[i][k];
    check64(v);
    r.a[i][j] = static_cast<std::int64_t>(v);
  }
}

void swap_rows(IntMatrix3& m, int i, int k) {
  std::swap(m.a[i], m.a[k]);
}

void swap_cols(IntMatrix3& m, IntMatrix3& r, int j, int k) {
  for (int i = 0; i < 3; ++i) {
    std::swap(m.a[i][j], m.a[i][k]);
    std::swap(r.a[i][j], r.a[i][k]);
  }
}

void negate_col(IntMatrix3& m, IntMatrix3& r, int j) {
  for (int i = 0; i < 3; ++i) {
    m.a[i][j] = -m.a[i][j];
    r.a[i][j] = -r.a[i][j];
  }
}

}  // namespace

IntDiagonalization diagonalize_over_z(const IntMatrix3& M) {
  IntMatrix3 m = M;
  IntMatrix3 r = IntMatrix3::identity();

  for (int t = 0; t < 3; ++t) {
    for (;;) {
      // find the entry of minimal nonzero magnitude in the trailing block
      int pi = -1, pj = -1;
      std::int64_t best = 0;
      for (int i = t; i < 3; ++i)
        for (int j = t; j < 3; ++j) {
          std::int64_t v = std::abs(m.a[i][j]);
          if (v != 0 && (pi < 0 || v < best)) {
            best = v;
            pi = i;
            pj = j;
          }
        }
      if (pi < 0) break;  // trailing block is zero
      if (pi != t) swap_rows(m, pi, t);
      if (pj != t) swap_cols(m, r, pj, t);

      bool clean = true;
      for (int i = t + 1; i < 3; ++i) {
        if (m.a[i][t] != 0) {
          std::int64_t q = m.a[i][t] / m.a[t][t];
          row_op(m, i, t, q);
          if (m.a[i][t] != 0) clean = false;
        }
      }
      for (int j = t + 1; j < 3; ++j) {
        if (m.a[t][j] != 0) {
          std::int64_t q = m.a[t][j] / m.a[t][t];
          col_op(m, r, j, t, q);
          if (m.a[t][j] != 0) clean = false;
        }
      }
      if (clean && [&] {
            for (int i = t + 1; i < 3; ++i)
              if (m.a[i][t] != 0) return false;
            for (int j = t + 1; j < 3; ++j)
              if (m.a[t][j] != 0) return false;
            return true;
          }())
        break;
    }
  }

  IntDiagonalization out;
  for (int i = 0; i < 3; ++i) {
    std::int64_t v = m.a[i][i];
    if (v < 0) {
      negate_col(m, r, i);
      v = -v;
    }
    out.diag[i] = v;
  }
  out.right = r;
  return out;
}

}  // namespace dav
