#include "opinionlab/saturation.hpp"

#include "opinionlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace opinionlab {

std::string_view to_string(SaturationFamily family) {
    switch (family) {
    case SaturationFamily::odd_tanh: return "odd_tanh";
    case SaturationFamily::asymmetric_logistic: return "asymmetric_logistic";
    case SaturationFamily::custom_table: return "custom_table";
    }
    return "odd_tanh";
}

SaturationFamily parse_saturation_family(std::string_view name) {
    for (auto f : {SaturationFamily::odd_tanh, SaturationFamily::asymmetric_logistic,
                   SaturationFamily::custom_table}) {
        if (to_string(f) == name) return f;
    }
    throw ParameterError("unknown saturation family '" + std::string(name) + "'");
}

namespace {

// Stable for both signs of t.
double logistic(double t) {
    return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

}  // namespace

SaturationSpec::SaturationSpec(SaturationFamily family, double k1, double k2)
    : family_(family), k1_(k1), k2_(k2) {}

SaturationSpec SaturationSpec::odd_tanh(double k) {
    if (!(k > 0.0) || !std::isfinite(k)) throw ParameterError("tanh saturation needs k > 0");
    SaturationSpec s(SaturationFamily::odd_tanh, k, k);
    s.check();
    return s;
}

SaturationSpec SaturationSpec::asymmetric_logistic(double k1, double k2) {
    if (!(k1 > 0.0) || !(k2 > 0.0) || !std::isfinite(k1) || !std::isfinite(k2)) {
        throw ParameterError("logistic saturation needs k1 > 0 and k2 > 0");
    }
    SaturationSpec s(SaturationFamily::asymmetric_logistic, k1, k2);
    s.slope_ = (k1 + k2) / (k1 * k2);
    s.shift_ = std::log(k1 / k2);
    s.check();
    return s;
}

SaturationSpec SaturationSpec::custom_table(std::vector<double> y, std::vector<double> v) {
    if (y.size() < 2 || y.size() != v.size()) {
        throw ParameterError("saturation table needs at least two (y, s) pairs of equal length");
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i]) || !std::isfinite(v[i])) {
            throw ParameterError("saturation table entries must be finite");
        }
        if (i > 0 && !(y[i] > y[i - 1])) {
            throw ParameterError("saturation table abscissae must be strictly increasing");
        }
        if (i > 0 && !(v[i] >= v[i - 1])) {
            throw ParameterError("saturation table values must be nondecreasing");
        }
    }
    const double lo = -v.front();
    const double hi = v.back();
    if (!(lo > 0.0) || !(hi > 0.0)) {
        throw ParameterError("saturation table must take negative and positive values");
    }
    SaturationSpec s(SaturationFamily::custom_table, lo, hi);
    s.ty_ = std::move(y);
    s.ts_ = std::move(v);
    s.check();
    return s;
}

double SaturationSpec::operator()(double y) const {
    switch (family_) {
    case SaturationFamily::odd_tanh:
        return k1_ * std::tanh(y / k1_);
    case SaturationFamily::asymmetric_logistic: {
        // Measured from the logistic's value at the origin so that S(0) is
        // exactly zero rather than zero up to rounding.
        return (k1_ + k2_) * (logistic(slope_ * y + shift_) - logistic(shift_));
    }
    case SaturationFamily::custom_table: {
        if (y <= ty_.front()) return ts_.front();
        if (y >= ty_.back()) return ts_.back();
        const auto it = std::upper_bound(ty_.begin(), ty_.end(), y);
        const std::size_t i = static_cast<std::size_t>(it - ty_.begin());
        const double w = (y - ty_[i - 1]) / (ty_[i] - ty_[i - 1]);
        return ts_[i - 1] + w * (ts_[i] - ts_[i - 1]);
    }
    }
    return 0.0;
}

double SaturationSpec::derivative(double y) const {
    switch (family_) {
    case SaturationFamily::odd_tanh: {
        const double t = std::tanh(y / k1_);
        return 1.0 - t * t;
    }
    case SaturationFamily::asymmetric_logistic: {
        const double t = slope_ * y + shift_;
        const double e = std::exp(-std::abs(t));
        const double sig_prime = e / ((1.0 + e) * (1.0 + e));
        return (k1_ + k2_) * slope_ * sig_prime;
    }
    case SaturationFamily::custom_table: {
        if (y < ty_.front() || y > ty_.back()) return 0.0;
        auto it = std::upper_bound(ty_.begin(), ty_.end(), y);
        std::size_t i = static_cast<std::size_t>(it - ty_.begin());
        if (i >= ty_.size()) i = ty_.size() - 1;
        return (ts_[i] - ts_[i - 1]) / (ty_[i] - ty_[i - 1]);
    }
    }
    return 0.0;
}

double SaturationSpec::max_slope() const {
    switch (family_) {
    case SaturationFamily::odd_tanh: return 1.0;
    case SaturationFamily::asymmetric_logistic:
        return (k1_ + k2_) * (k1_ + k2_) / (4.0 * k1_ * k2_);
    case SaturationFamily::custom_table: {
        double m = 0.0;
        for (std::size_t i = 1; i < ty_.size(); ++i) {
            m = std::max(m, (ts_[i] - ts_[i - 1]) / (ty_[i] - ty_[i - 1]));
        }
        return m;
    }
    }
    return 1.0;
}

void SaturationSpec::check() const {
    const auto& s = *this;
    const double h = 1e-6;
    if (std::abs(s(0.0)) > 1e-9) throw ParameterError("saturation must satisfy S(0) = 0");
    const double slope = (s(h) - s(-h)) / (2.0 * h);
    if (std::abs(slope - 1.0) > 1e-9) {
        throw ParameterError("saturation must satisfy S'(0) = 1 (got " + std::to_string(slope) +
                             ")");
    }
    if (family_ == SaturationFamily::asymmetric_logistic && k1_ != k2_) {
        const double h2 = 1e-4;
        const double curvature = (s(h2) - 2.0 * s(0.0) + s(-h2)) / (h2 * h2);
        if (std::abs(curvature) <= 1e-6) {
            throw ParameterError("asymmetric saturation must have S''(0) != 0");
        }
    }
}

}  // namespace opinionlab
