#pragma once

#include <string_view>
#include <vector>

namespace opinionlab {

enum class SaturationFamily { odd_tanh, asymmetric_logistic, custom_table };

std::string_view to_string(SaturationFamily family);
SaturationFamily parse_saturation_family(std::string_view name);

/// Sigmoidal saturation S with S(0) = 0, S'(0) = 1 and range within [-k1, k2].
/// The constraints are checked numerically at construction.
class SaturationSpec {
public:
    /// k * tanh(y / k).
    static SaturationSpec odd_tanh(double k = 1.0);
    /// (k1 + k2) * logistic(B y + y0) - k1 with B = (k1 + k2) / (k1 k2) and
    /// y0 = ln(k1 / k2). Not odd unless k1 == k2.
    static SaturationSpec asymmetric_logistic(double k1 = 0.8, double k2 = 1.2);
    /// Piecewise-linear interpolation through (y, s) knots, clamped outside.
    static SaturationSpec custom_table(std::vector<double> y, std::vector<double> s);

    SaturationSpec() : SaturationSpec(odd_tanh()) {}

    SaturationFamily family() const { return family_; }
    double k1() const { return k1_; }
    double k2() const { return k2_; }

    double operator()(double y) const;
    double derivative(double y) const;
    /// (S(y) - S(-y)) / 2, the odd part used by the two-option reduction.
    double odd(double y) const { return 0.5 * ((*this)(y) - (*this)(-y)); }
    bool is_odd() const { return family_ == SaturationFamily::odd_tanh || k1_ == k2_; }
    /// Supremum of S' over the real line.
    double max_slope() const;

    const std::vector<double>& table_y() const { return ty_; }
    const std::vector<double>& table_s() const { return ts_; }

private:
    SaturationSpec(SaturationFamily family, double k1, double k2);
    void check() const;

    SaturationFamily family_;
    double k1_;
    double k2_;
    double slope_ = 1.0;
    double shift_ = 0.0;
    std::vector<double> ty_, ts_;
};

inline double saturation_eval(const SaturationSpec& s, double y) { return s(y); }
inline double saturation_derivative(const SaturationSpec& s, double y) { return s.derivative(y); }

}  // namespace opinionlab
