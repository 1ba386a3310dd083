#pragma once

#include "rational.hpp"
#include "error.hpp"

#include <vector>

namespace crkit {

inline bool is_zero_val(const Rational &x) { return x == 0; }
inline bool is_zero_val(const GaussianRational &x) { return x.is_zero(); }

/// Dense matrix over an exact field (Rational or GaussianRational).
template <class T> class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(std::size_t(rows) * cols) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    T &at(int r, int c) { return data_[std::size_t(r) * cols_ + c]; }
    const T &at(int r, int c) const { return data_[std::size_t(r) * cols_ + c]; }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int k = 0; k < n; ++k)
            m.at(k, k) = T(1);
        return m;
    }

    Matrix operator*(const Matrix &o) const {
        if (cols_ != o.rows_)
            throw InputError("Matrix multiply: shape mismatch");
        Matrix r(rows_, o.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                if (is_zero_val(at(i, k)))
                    continue;
                for (int j = 0; j < o.cols_; ++j)
                    r.at(i, j) += at(i, k) * o.at(k, j);
            }
        return r;
    }

    std::vector<T> apply(const std::vector<T> &v) const {
        if ((int)v.size() != cols_)
            throw InputError("Matrix apply: shape mismatch");
        std::vector<T> out(rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j)
                if (!is_zero_val(at(i, j)))
                    out[i] += at(i, j) * v[j];
        return out;
    }

    /// In-place reduced row echelon form. Returns pivot columns.
    std::vector<int> rref() {
        std::vector<int> pivots;
        int r = 0;
        for (int c = 0; c < cols_ && r < rows_; ++c) {
            int p = -1;
            for (int i = r; i < rows_; ++i)
                if (!is_zero_val(at(i, c))) {
                    p = i;
                    break;
                }
            if (p < 0)
                continue;
            if (p != r)
                for (int j = 0; j < cols_; ++j)
                    std::swap(at(p, j), at(r, j));
            T inv = T(1) / at(r, c);
            for (int j = c; j < cols_; ++j)
                at(r, j) = at(r, j) * inv;
            for (int i = 0; i < rows_; ++i) {
                if (i == r || is_zero_val(at(i, c)))
                    continue;
                T f = at(i, c);
                for (int j = c; j < cols_; ++j)
                    at(i, j) = at(i, j) - f * at(r, j);
            }
            pivots.push_back(c);
            ++r;
        }
        return pivots;
    }

    int rank() const {
        Matrix m = *this;
        return (int)m.rref().size();
    }

    /// Basis of the right null space, one vector per free column.
    std::vector<std::vector<T>> kernel() const {
        Matrix m = *this;
        std::vector<int> pivots = m.rref();
        std::vector<bool> is_pivot(cols_, false);
        for (int c : pivots)
            is_pivot[c] = true;
        std::vector<std::vector<T>> basis;
        for (int c = 0; c < cols_; ++c) {
            if (is_pivot[c])
                continue;
            std::vector<T> v(cols_);
            v[c] = T(1);
            for (std::size_t i = 0; i < pivots.size(); ++i)
                v[pivots[i]] = -m.at((int)i, c);
            basis.push_back(std::move(v));
        }
        return basis;
    }

    T det() const {
        if (rows_ != cols_)
            throw InputError("det: matrix not square");
        Matrix m = *this;
        T d = T(1);
        for (int c = 0; c < cols_; ++c) {
            int p = -1;
            for (int i = c; i < rows_; ++i)
                if (!is_zero_val(m.at(i, c))) {
                    p = i;
                    break;
                }
            if (p < 0)
                return T(0);
            if (p != c) {
                for (int j = 0; j < cols_; ++j)
                    std::swap(m.at(p, j), m.at(c, j));
                d = -d;
            }
            d = d * m.at(c, c);
            T inv = T(1) / m.at(c, c);
            for (int i = c + 1; i < rows_; ++i) {
                if (is_zero_val(m.at(i, c)))
                    continue;
                T f = m.at(i, c) * inv;
                for (int j = c; j < cols_; ++j)
                    m.at(i, j) = m.at(i, j) - f * m.at(c, j);
            }
        }
        return d;
    }

    Matrix inverse() const {
        if (rows_ != cols_)
            throw InputError("inverse: matrix not square");
        Matrix aug(rows_, 2 * cols_);
        for (int i = 0; i < rows_; ++i) {
            for (int j = 0; j < cols_; ++j)
                aug.at(i, j) = at(i, j);
            aug.at(i, cols_ + i) = T(1);
        }
        std::vector<int> piv = aug.rref();
        bool ok = (int)piv.size() == rows_;
        for (int i = 0; ok && i < rows_; ++i)
            ok = piv[i] == i;
        if (!ok)
            throw InputError("inverse: matrix is singular");
        Matrix inv(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j)
                inv.at(i, j) = aug.at(i, cols_ + j);
        return inv;
    }

  private:
    int rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

/// Row space comparison: do the rows of A and B span the same subspace?
template <class T> bool same_row_space(Matrix<T> a, Matrix<T> b) {
    if (a.cols() != b.cols())
        return false;
    std::vector<int> pa = a.rref();
    std::vector<int> pb = b.rref();
    if (pa != pb)
        return false;
    for (std::size_t i = 0; i < pa.size(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (!(is_zero_val(a.at((int)i, j) - b.at((int)i, j))))
                return false;
    return true;
}

/// Is every row of `sub` in the row space of `space`?
template <class T> bool row_space_contains(Matrix<T> space, const Matrix<T> &sub) {
    int base = space.rank();
    Matrix<T> stacked(space.rows() + sub.rows(), space.cols());
    for (int i = 0; i < space.rows(); ++i)
        for (int j = 0; j < space.cols(); ++j)
            stacked.at(i, j) = space.at(i, j);
    for (int i = 0; i < sub.rows(); ++i)
        for (int j = 0; j < sub.cols(); ++j)
            stacked.at(space.rows() + i, j) = sub.at(i, j);
    return stacked.rank() == base;
}

} // namespace crkit
