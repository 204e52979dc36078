// Closed real intervals, interval vectors and interval matrices.
//
// Every primitive operation rounds outward: when the floating-point result of
// an endpoint computation is inexact, that endpoint is moved one ULP away from
// the interval.  Exactness is detected with error-free transformations, so
// degenerate inputs reproduce exact arithmetic whenever the real result is
// representable.

#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sensreach {

class Interval {
public:
    constexpr Interval() = default;
    /*implicit*/ Interval(double value);
    Interval(double lo, double hi);

    [[nodiscard]] double lo() const noexcept { return lo_; }
    [[nodiscard]] double hi() const noexcept { return hi_; }
    [[nodiscard]] double mid() const noexcept;
    [[nodiscard]] double width() const noexcept { return hi_ - lo_; }
    // max(|lo|, |hi|)
    [[nodiscard]] double mag() const noexcept;

    [[nodiscard]] bool is_degenerate() const noexcept { return lo_ == hi_; }
    // lo >= 0 or hi <= 0
    [[nodiscard]] bool sign_stable() const noexcept { return lo_ >= 0.0 || hi_ <= 0.0; }
    [[nodiscard]] bool contains(double x) const noexcept { return lo_ <= x && x <= hi_; }
    [[nodiscard]] bool contains(const Interval& other) const noexcept {
        return lo_ <= other.lo_ && other.hi_ <= hi_;
    }

    friend bool operator==(const Interval&, const Interval&) = default;

private:
    double lo_ = 0.0;
    double hi_ = 0.0;
};

[[nodiscard]] Interval operator+(const Interval& a, const Interval& b);
[[nodiscard]] Interval operator-(const Interval& a, const Interval& b);
[[nodiscard]] Interval operator-(const Interval& a);
[[nodiscard]] Interval operator*(const Interval& a, const Interval& b);
[[nodiscard]] Interval operator*(double s, const Interval& a);
// Throws std::domain_error if b contains zero.
[[nodiscard]] Interval operator/(const Interval& a, const Interval& b);

Interval& operator+=(Interval& a, const Interval& b);

[[nodiscard]] Interval sqr(const Interval& a);
// Throws std::domain_error if a.lo() < 0.
[[nodiscard]] Interval sqrt(const Interval& a);
[[nodiscard]] Interval hull(const Interval& a, const Interval& b);
// Empty intersections are not representable; std::nullopt signals disjointness.
[[nodiscard]] std::optional<Interval> intersect(const Interval& a, const Interval& b);
// Smallest interval containing min(x, y) for x in a, y in b (likewise max).
[[nodiscard]] Interval min(const Interval& a, const Interval& b);
[[nodiscard]] Interval max(const Interval& a, const Interval& b);

std::ostream& operator<<(std::ostream& os, const Interval& a);

class IntervalVector {
public:
    IntervalVector() = default;
    explicit IntervalVector(std::size_t n) : comps_(n) {}
    IntervalVector(std::initializer_list<Interval> comps) : comps_(comps) {}
    explicit IntervalVector(std::vector<Interval> comps) : comps_(std::move(comps)) {}

    static IntervalVector from_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
    static IntervalVector point(const Eigen::VectorXd& x);

    [[nodiscard]] std::size_t size() const noexcept { return comps_.size(); }
    [[nodiscard]] const Interval& operator[](std::size_t i) const { return comps_[i]; }
    Interval& operator[](std::size_t i) { return comps_[i]; }
    [[nodiscard]] auto begin() const noexcept { return comps_.begin(); }
    [[nodiscard]] auto end() const noexcept { return comps_.end(); }

    [[nodiscard]] Eigen::VectorXd lower() const;
    [[nodiscard]] Eigen::VectorXd upper() const;
    [[nodiscard]] Eigen::VectorXd mid() const;
    [[nodiscard]] Eigen::VectorXd width() const;
    [[nodiscard]] bool contains(const Eigen::VectorXd& x) const;
    [[nodiscard]] bool contains(const IntervalVector& other) const;
    // Product of widths.
    [[nodiscard]] double volume() const;

    friend bool operator==(const IntervalVector&, const IntervalVector&) = default;

private:
    std::vector<Interval> comps_;
};

class IntervalMatrix {
public:
    IntervalMatrix() = default;
    IntervalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), entries_(rows * cols) {}

    static IntervalMatrix from_bounds(const Eigen::MatrixXd& lo, const Eigen::MatrixXd& hi);
    static IntervalMatrix point(const Eigen::MatrixXd& m);
    static IntervalMatrix identity(std::size_t n);
    // Every entry equal to [-1, 1] scaled by radius.
    static IntervalMatrix symmetric_box(std::size_t rows, std::size_t cols, double radius);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] const Interval& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
    Interval& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }

    [[nodiscard]] Eigen::MatrixXd lower() const;
    [[nodiscard]] Eigen::MatrixXd upper() const;
    [[nodiscard]] Eigen::MatrixXd mid() const;
    [[nodiscard]] bool contains(const Eigen::MatrixXd& m) const;
    [[nodiscard]] bool contains(const IntervalMatrix& other) const;
    [[nodiscard]] bool sign_stable() const;
    [[nodiscard]] std::size_t sign_stable_count() const;

    friend bool operator==(const IntervalMatrix&, const IntervalMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Interval> entries_;  // row-major
};

// Throws std::invalid_argument on shape mismatch.
[[nodiscard]] IntervalMatrix operator*(const IntervalMatrix& a, const IntervalMatrix& b);
[[nodiscard]] IntervalMatrix operator+(const IntervalMatrix& a, const IntervalMatrix& b);
[[nodiscard]] IntervalMatrix operator*(double s, const IntervalMatrix& a);

struct ScaledTerm {
    double scale;
    IntervalMatrix matrix;
};

// Componentwise sum of scale * matrix.  Throws std::invalid_argument on an
// empty sequence or mismatched shapes.
[[nodiscard]] IntervalMatrix scaled_sum(std::span<const ScaledTerm> terms);

// Upper bound on the infinity norm of every point matrix in a.
[[nodiscard]] double norm_inf(const IntervalMatrix& a);

std::ostream& operator<<(std::ostream& os, const IntervalVector& v);
std::ostream& operator<<(std::ostream& os, const IntervalMatrix& m);

// Directed-rounding helpers shared by modules that compute bounds in plain
// floating point.
namespace rounding {
[[nodiscard]] double next_down(double x) noexcept;
[[nodiscard]] double next_up(double x) noexcept;
[[nodiscard]] double add_down(double a, double b) noexcept;
[[nodiscard]] double add_up(double a, double b) noexcept;
[[nodiscard]] double mul_down(double a, double b) noexcept;
[[nodiscard]] double mul_up(double a, double b) noexcept;
[[nodiscard]] double div_down(double a, double b) noexcept;
[[nodiscard]] double div_up(double a, double b) noexcept;
}  // namespace rounding

}  // namespace sensreach
