#include "sensreach/interval.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sensreach {

namespace rounding {

double next_down(double x) noexcept { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }
double next_up(double x) noexcept { return std::nextafter(x, std::numeric_limits<double>::infinity()); }

namespace {

// Rounding error of s = fl(a + b) (Knuth's TwoSum): a + b = s + err exactly.
double two_sum_err(double a, double b, double s) noexcept {
    const double bb = s - a;
    return (a - (s - bb)) + (b - bb);
}

// Results in the subnormal range may carry an inexact FMA residual.
bool tiny(double x) noexcept { return std::abs(x) < DBL_MIN; }

}  // namespace

double add_down(double a, double b) noexcept {
    const double s = a + b;
    if (!std::isfinite(s)) return s;
    return two_sum_err(a, b, s) < 0.0 ? next_down(s) : s;
}

double add_up(double a, double b) noexcept {
    const double s = a + b;
    if (!std::isfinite(s)) return s;
    return two_sum_err(a, b, s) > 0.0 ? next_up(s) : s;
}

double mul_down(double a, double b) noexcept {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double p = a * b;
    if (!std::isfinite(p)) return p;
    if (tiny(p)) return next_down(p);
    return std::fma(a, b, -p) < 0.0 ? next_down(p) : p;
}

double mul_up(double a, double b) noexcept {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double p = a * b;
    if (!std::isfinite(p)) return p;
    if (tiny(p)) return next_up(p);
    return std::fma(a, b, -p) > 0.0 ? next_up(p) : p;
}

// a / b = q + r / b with r exact.
double div_down(double a, double b) noexcept {
    if (a == 0.0) return 0.0;
    const double q = a / b;
    if (!std::isfinite(q) || std::isinf(b)) return q;
    if (tiny(q)) return next_down(q);
    const double r = std::fma(-q, b, a);
    return (r != 0.0 && std::signbit(r) != std::signbit(b)) ? next_down(q) : q;
}

double div_up(double a, double b) noexcept {
    if (a == 0.0) return 0.0;
    const double q = a / b;
    if (!std::isfinite(q) || std::isinf(b)) return q;
    if (tiny(q)) return next_up(q);
    const double r = std::fma(-q, b, a);
    return (r != 0.0 && std::signbit(r) == std::signbit(b)) ? next_up(q) : q;
}

}  // namespace rounding

using namespace rounding;

Interval::Interval(double value) : lo_(value), hi_(value) {
    if (std::isnan(value)) throw std::invalid_argument("Interval: NaN endpoint");
}

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (std::isnan(lo) || std::isnan(hi)) throw std::invalid_argument("Interval: NaN endpoint");
    if (lo > hi) {
        throw std::invalid_argument("Interval: lo > hi (" + std::to_string(lo) + " > " + std::to_string(hi) + ")");
    }
}

double Interval::mid() const noexcept { return std::midpoint(lo_, hi_); }

double Interval::mag() const noexcept { return std::max(std::abs(lo_), std::abs(hi_)); }

Interval operator+(const Interval& a, const Interval& b) {
    return {add_down(a.lo(), b.lo()), add_up(a.hi(), b.hi())};
}

Interval operator-(const Interval& a) { return {-a.hi(), -a.lo()}; }

Interval operator-(const Interval& a, const Interval& b) { return a + (-b); }

Interval& operator+=(Interval& a, const Interval& b) { return a = a + b; }

Interval operator*(const Interval& a, const Interval& b) {
    const double lo = std::min({mul_down(a.lo(), b.lo()), mul_down(a.lo(), b.hi()), mul_down(a.hi(), b.lo()),
                                mul_down(a.hi(), b.hi())});
    const double hi = std::max({mul_up(a.lo(), b.lo()), mul_up(a.lo(), b.hi()), mul_up(a.hi(), b.lo()),
                                mul_up(a.hi(), b.hi())});
    return {lo, hi};
}

Interval operator*(double s, const Interval& a) { return Interval(s) * a; }

Interval operator/(const Interval& a, const Interval& b) {
    if (b.contains(0.0)) throw std::domain_error("Interval division by an interval containing zero");
    const double lo = std::min({div_down(a.lo(), b.lo()), div_down(a.lo(), b.hi()), div_down(a.hi(), b.lo()),
                                div_down(a.hi(), b.hi())});
    const double hi = std::max({div_up(a.lo(), b.lo()), div_up(a.lo(), b.hi()), div_up(a.hi(), b.lo()),
                                div_up(a.hi(), b.hi())});
    return {lo, hi};
}

Interval sqr(const Interval& a) {
    const double l = std::abs(a.lo());
    const double h = std::abs(a.hi());
    const double hi = mul_up(std::max(l, h), std::max(l, h));
    if (a.contains(0.0)) return {0.0, hi};
    const double m = std::min(l, h);
    return {mul_down(m, m), hi};
}

Interval sqrt(const Interval& a) {
    if (a.lo() < 0.0) throw std::domain_error("Interval sqrt of negative values");
    auto down = [](double x) {
        const double s = std::sqrt(x);
        if (x == 0.0 || std::isinf(x)) return s;
        return std::fma(-s, s, x) < 0.0 ? next_down(s) : s;
    };
    auto up = [](double x) {
        const double s = std::sqrt(x);
        if (x == 0.0 || std::isinf(x)) return s;
        return std::fma(-s, s, x) > 0.0 ? next_up(s) : s;
    };
    return {down(a.lo()), up(a.hi())};
}

Interval hull(const Interval& a, const Interval& b) {
    return {std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

std::optional<Interval> intersect(const Interval& a, const Interval& b) {
    const double lo = std::max(a.lo(), b.lo());
    const double hi = std::min(a.hi(), b.hi());
    if (lo > hi) return std::nullopt;
    return Interval(lo, hi);
}

Interval min(const Interval& a, const Interval& b) {
    return {std::min(a.lo(), b.lo()), std::min(a.hi(), b.hi())};
}

Interval max(const Interval& a, const Interval& b) {
    return {std::max(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

std::ostream& operator<<(std::ostream& os, const Interval& a) {
    return os << '[' << a.lo() << ", " << a.hi() << ']';
}

// ---------------------------------------------------------------------------

IntervalVector IntervalVector::from_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    if (lo.size() != hi.size()) throw std::invalid_argument("IntervalVector: bound size mismatch");
    std::vector<Interval> comps;
    comps.reserve(static_cast<std::size_t>(lo.size()));
    for (Eigen::Index i = 0; i < lo.size(); ++i) comps.emplace_back(lo[i], hi[i]);
    return IntervalVector(std::move(comps));
}

IntervalVector IntervalVector::point(const Eigen::VectorXd& x) { return from_bounds(x, x); }

Eigen::VectorXd IntervalVector::lower() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) v[static_cast<Eigen::Index>(i)] = comps_[i].lo();
    return v;
}

Eigen::VectorXd IntervalVector::upper() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) v[static_cast<Eigen::Index>(i)] = comps_[i].hi();
    return v;
}

Eigen::VectorXd IntervalVector::mid() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) v[static_cast<Eigen::Index>(i)] = comps_[i].mid();
    return v;
}

Eigen::VectorXd IntervalVector::width() const { return upper() - lower(); }

bool IntervalVector::contains(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
        if (!comps_[i].contains(x[static_cast<Eigen::Index>(i)])) return false;
    }
    return true;
}

bool IntervalVector::contains(const IntervalVector& other) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
        if (!comps_[i].contains(other[i])) return false;
    }
    return true;
}

double IntervalVector::volume() const {
    double v = 1.0;
    for (const auto& c : comps_) v *= c.width();
    return v;
}

std::ostream& operator<<(std::ostream& os, const IntervalVector& v) {
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    return os << ']';
}

// ---------------------------------------------------------------------------

IntervalMatrix IntervalMatrix::from_bounds(const Eigen::MatrixXd& lo, const Eigen::MatrixXd& hi) {
    if (lo.rows() != hi.rows() || lo.cols() != hi.cols()) {
        throw std::invalid_argument("IntervalMatrix: bound shape mismatch");
    }
    IntervalMatrix m(static_cast<std::size_t>(lo.rows()), static_cast<std::size_t>(lo.cols()));
    for (Eigen::Index i = 0; i < lo.rows(); ++i) {
        for (Eigen::Index j = 0; j < lo.cols(); ++j) {
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = Interval(lo(i, j), hi(i, j));
        }
    }
    return m;
}

IntervalMatrix IntervalMatrix::point(const Eigen::MatrixXd& m) { return from_bounds(m, m); }

IntervalMatrix IntervalMatrix::identity(std::size_t n) {
    IntervalMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Interval(1.0);
    return m;
}

IntervalMatrix IntervalMatrix::symmetric_box(std::size_t rows, std::size_t cols, double radius) {
    IntervalMatrix m(rows, cols);
    for (auto& e : m.entries_) e = Interval(-radius, radius);
    return m;
}

Eigen::MatrixXd IntervalMatrix::lower() const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j).lo();
    }
    return m;
}

Eigen::MatrixXd IntervalMatrix::upper() const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j).hi();
    }
    return m;
}

Eigen::MatrixXd IntervalMatrix::mid() const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j).mid();
    }
    return m;
}

bool IntervalMatrix::contains(const Eigen::MatrixXd& m) const {
    if (static_cast<std::size_t>(m.rows()) != rows_ || static_cast<std::size_t>(m.cols()) != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            if (!(*this)(i, j).contains(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))) return false;
        }
    }
    return true;
}

bool IntervalMatrix::contains(const IntervalMatrix& other) const {
    if (other.rows_ != rows_ || other.cols_ != cols_) return false;
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        if (!entries_[k].contains(other.entries_[k])) return false;
    }
    return true;
}

bool IntervalMatrix::sign_stable() const { return sign_stable_count() == entries_.size(); }

std::size_t IntervalMatrix::sign_stable_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [](const Interval& e) { return e.sign_stable(); }));
}

IntervalMatrix operator*(const IntervalMatrix& a, const IntervalMatrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("IntervalMatrix product: " + std::to_string(a.rows()) + "x" +
                                    std::to_string(a.cols()) + " times " + std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()));
    }
    IntervalMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < b.cols(); ++k) {
            Interval acc;
            for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * b(j, k);
            out(i, k) = acc;
        }
    }
    return out;
}

IntervalMatrix operator+(const IntervalMatrix& a, const IntervalMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("IntervalMatrix sum: shape mismatch");
    IntervalMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) + b(i, j);
    }
    return out;
}

IntervalMatrix operator*(double s, const IntervalMatrix& a) {
    IntervalMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = s * a(i, j);
    }
    return out;
}

IntervalMatrix scaled_sum(std::span<const ScaledTerm> terms) {
    if (terms.empty()) throw std::invalid_argument("scaled_sum: no terms");
    const std::size_t rows = terms.front().matrix.rows();
    const std::size_t cols = terms.front().matrix.cols();
    IntervalMatrix out(rows, cols);
    for (const auto& term : terms) {
        if (term.matrix.rows() != rows || term.matrix.cols() != cols) {
            throw std::invalid_argument("scaled_sum: shape mismatch");
        }
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) out(i, j) += term.scale * term.matrix(i, j);
        }
    }
    return out;
}

double norm_inf(const IntervalMatrix& a) {
    double best = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) row = add_up(row, a(i, j).mag());
        best = std::max(best, row);
    }
    return best;
}

std::ostream& operator<<(std::ostream& os, const IntervalMatrix& m) {
    os << '[';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        os << (i ? ", [" : "[");
        for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j);
        os << ']';
    }
    return os << ']';
}

}  // namespace sensreach
