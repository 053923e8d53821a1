#include "opinionlab/graph.hpp"

#include "opinionlab/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

namespace opinionlab {

std::string_view to_string(GraphKind kind) {
    switch (kind) {
    case GraphKind::path: return "path";
    case GraphKind::cycle: return "cycle";
    case GraphKind::star: return "star";
    case GraphKind::wheel: return "wheel";
    case GraphKind::all_to_all: return "all_to_all";
    case GraphKind::custom: return "custom";
    }
    return "custom";
}

GraphKind parse_graph_kind(std::string_view name) {
    for (auto kind : {GraphKind::path, GraphKind::cycle, GraphKind::star, GraphKind::wheel,
                      GraphKind::all_to_all, GraphKind::custom}) {
        if (to_string(kind) == name) return kind;
    }
    throw ParameterError("unknown graph kind '" + std::string(name) + "'");
}

AdjacencySpec::AdjacencySpec(Eigen::MatrixXd entries, GraphKind kind, bool allow_self_loops)
    : entries_(std::move(entries)), kind_(kind) {
    if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
        throw ParameterError("adjacency matrix must be square and non-empty");
    }
    if (!entries_.allFinite()) throw ParameterError("adjacency matrix has non-finite entries");
    if (!allow_self_loops && !has_zero_diagonal()) {
        throw ParameterError("adjacency matrix must have a zero diagonal");
    }
    signed_ = (entries_.array() < 0.0).any();
    symmetric_ = (entries_.array() == entries_.transpose().array()).all();
}

bool AdjacencySpec::has_zero_diagonal() const {
    return (entries_.diagonal().array() == 0.0).all();
}

AdjacencySpec build_graph(GraphKind kind, int n, double weight) {
    const int min_n = (kind == GraphKind::cycle || kind == GraphKind::wheel) ? 3 : 2;
    if (kind == GraphKind::custom) {
        throw ParameterError("custom graphs are built from an explicit matrix");
    }
    if (n < min_n) {
        std::ostringstream msg;
        msg << to_string(kind) << " graph needs n >= " << min_n << ", got " << n;
        throw ParameterError(msg.str());
    }
    if (!std::isfinite(weight)) throw ParameterError("graph weight must be finite");

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    auto link = [&](int i, int k) {
        a(i, k) = weight;
        a(k, i) = weight;
    };
    switch (kind) {
    case GraphKind::path:
        for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
        break;
    case GraphKind::cycle:
        for (int i = 0; i < n; ++i) link(i, (i + 1) % n);
        break;
    case GraphKind::star:
        for (int i = 1; i < n; ++i) link(0, i);
        break;
    case GraphKind::wheel: {
        const int rim = n - 1;
        for (int i = 1; i < n; ++i) link(0, i);
        for (int i = 0; i < rim; ++i) {
            const int j = (i + 1) % rim;
            if (i != j) link(1 + i, 1 + j);
        }
        break;
    }
    case GraphKind::all_to_all:
        a.setConstant(weight);
        a.diagonal().setZero();
        break;
    case GraphKind::custom:
        break;
    }
    return AdjacencySpec(std::move(a), kind);
}

void validate_partition(const Partition& partition, int n) {
    (void)cell_index(partition, n);
}

std::vector<int> cell_index(const Partition& partition, int n) {
    std::vector<int> cell_of(n, -1);
    int covered = 0;
    for (int p = 0; p < static_cast<int>(partition.size()); ++p) {
        if (partition[p].empty()) throw ParameterError("partition has an empty cell");
        for (int i : partition[p]) {
            if (i < 0 || i >= n || cell_of[i] != -1) {
                throw ParameterError("partition cells must cover agents 0..n-1 disjointly");
            }
            cell_of[i] = p;
            ++covered;
        }
    }
    if (covered != n) throw ParameterError("partition does not cover every agent");
    return cell_of;
}

AdjacencySpec block_graph(const Partition& partition, double within, double across) {
    int n = 0;
    for (const auto& cell : partition) n += static_cast<int>(cell.size());
    if (n == 0) throw ParameterError("block graph needs at least one agent");
    const auto cell_of = cell_index(partition, n);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            a(i, k) = (i == k) ? 0.0 : (cell_of[i] == cell_of[k] ? within : across);
        }
    }
    return AdjacencySpec(std::move(a));
}

namespace {

std::vector<bool> reachable_from(const Eigen::MatrixXd& m, int start, bool transpose) {
    const int n = static_cast<int>(m.rows());
    std::vector<bool> seen(n, false);
    std::deque<int> queue{start};
    seen[start] = true;
    while (!queue.empty()) {
        const int i = queue.front();
        queue.pop_front();
        for (int k = 0; k < n; ++k) {
            const double w = transpose ? m(k, i) : m(i, k);
            if (w != 0.0 && !seen[k]) {
                seen[k] = true;
                queue.push_back(k);
            }
        }
    }
    return seen;
}

bool strongly_connected(const Eigen::MatrixXd& m) {
    // Entry (i, k) != 0 is an edge k -> i; strong connectivity needs every node
    // reachable from node 0 along edges and along reversed edges.
    auto all = [](const std::vector<bool>& v) {
        return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
    };
    return all(reachable_from(m, 0, false)) && all(reachable_from(m, 0, true));
}

Eigen::VectorXd real_unit(const Eigen::VectorXcd& v) {
    Eigen::VectorXd r = v.real();
    // A complex scalar multiple may leave the real part tiny; rotate so the
    // largest component is real first.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (std::abs(v(arg)) > 0.0) {
        const std::complex<double> phase = std::conj(v(arg)) / std::abs(v(arg));
        r = (v * phase).real();
    }
    const double norm = r.norm();
    return norm > 0.0 ? Eigen::VectorXd(r / norm) : r;
}

void orient_positive_sum(Eigen::VectorXd& v) {
    if (v.sum() < 0.0) v = -v;
}

void orient_first_entry_positive(Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            if (v(i) < 0.0) v = -v;
            return;
        }
    }
}

// Eigenvalues sorted ascending by real part (ties by imaginary part).
std::vector<Eigen::Index> order_by_real(const Eigen::VectorXcd& ev) {
    std::vector<Eigen::Index> order(ev.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (ev(a).real() != ev(b).real()) return ev(a).real() < ev(b).real();
        return ev(a).imag() < ev(b).imag();
    });
    return order;
}

Eigen::Index nearest(const Eigen::VectorXcd& ev, std::complex<double> target) {
    Eigen::Index best = 0;
    double best_dist = std::abs(ev(0) - target);
    for (Eigen::Index i = 1; i < ev.size(); ++i) {
        const double dist = std::abs(ev(i) - target);
        if (dist < best_dist) {
            best = i;
            best_dist = dist;
        }
    }
    return best;
}

void set_flags(const Eigen::VectorXcd& ev, Eigen::Index chosen, bool& real, bool& simple,
               bool& isolated) {
    const std::complex<double> lambda = ev(chosen);
    const double tol = spectral_gap_tolerance(std::abs(lambda));
    real = std::abs(lambda.imag()) <= tol;
    simple = true;
    isolated = true;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (i == chosen) continue;
        if (std::abs(ev(i) - lambda) <= tol) simple = false;
        if (std::abs(ev(i).real() - lambda.real()) <= tol) isolated = false;
    }
}

}  // namespace

bool is_strongly_connected(const AdjacencySpec& a) { return strongly_connected(a.entries()); }

double spectral_gap_tolerance(double lambda) { return 1e-8 * std::max(1.0, std::abs(lambda)); }

SpectralSummary spectral_extrema(const AdjacencySpec& a) { return spectral_extrema(a.entries()); }

SpectralSummary spectral_extrema(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
        throw DimensionError("spectral_extrema needs a non-empty square matrix");
    }
    SpectralSummary s;
    s.symmetric = (m.array() == m.transpose().array()).all();
    s.strongly_connected = strongly_connected(m);
    const Eigen::Index n = m.rows();

    Eigen::VectorXcd ev(n);
    Eigen::MatrixXcd right(n, n), left(n, n);
    Eigen::VectorXcd left_ev(n);
    if (s.symmetric) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        ev = es.eigenvalues().cast<std::complex<double>>();
        right = es.eigenvectors().cast<std::complex<double>>();
        left = right;
        left_ev = ev;
    } else {
        Eigen::EigenSolver<Eigen::MatrixXd> es(m, true);
        ev = es.eigenvalues();
        right = es.eigenvectors();
        Eigen::EigenSolver<Eigen::MatrixXd> est(m.transpose(), true);
        left_ev = est.eigenvalues();
        left = est.eigenvectors();
    }

    const auto order = order_by_real(ev);
    s.eigenvalues.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) s.eigenvalues(i) = ev(order[i]);

    // Prefer the real eigenvalue when a conjugate pair shares the extreme real part.
    auto extreme = [&](bool want_max) {
        Eigen::Index idx = want_max ? order.back() : order.front();
        const double re = ev(idx).real();
        for (auto i : order) {
            if (std::abs(ev(i).real() - re) <= spectral_gap_tolerance(re) &&
                std::abs(ev(i).imag()) < std::abs(ev(idx).imag())) {
                idx = i;
            }
        }
        return idx;
    };
    const Eigen::Index imax = extreme(true);
    const Eigen::Index imin = extreme(false);

    s.lambda_max = ev(imax).real();
    s.lambda_min = ev(imin).real();
    set_flags(ev, imax, s.lambda_max_real, s.lambda_max_simple, s.lambda_max_real_part_isolated);
    set_flags(ev, imin, s.lambda_min_real, s.lambda_min_simple, s.lambda_min_real_part_isolated);

    s.v_max = real_unit(right.col(imax));
    s.v_min = real_unit(right.col(imin));
    s.w_max = real_unit(left.col(nearest(left_ev, ev(imax))));
    s.w_min = real_unit(left.col(nearest(left_ev, ev(imin))));

    orient_positive_sum(s.v_max);
    orient_positive_sum(s.w_max);
    orient_first_entry_positive(s.v_min);
    if (s.v_min.dot(s.w_min) < 0.0) s.w_min = -s.w_min;

    s.perron_positive = (s.v_max.array() > 1e-12).all();

    if (!s.lambda_max_real) s.diagnostics.emplace_back("lambda_max is complex");
    if (!s.lambda_min_real) s.diagnostics.emplace_back("lambda_min is complex");
    if (!s.lambda_max_simple) s.diagnostics.emplace_back("lambda_max is not simple");
    if (!s.lambda_min_simple) s.diagnostics.emplace_back("lambda_min is not simple");
    if (!s.lambda_min_real_part_isolated) {
        s.diagnostics.emplace_back("another eigenvalue shares the real part of lambda_min");
    }
    if (!s.strongly_connected) s.diagnostics.emplace_back("graph is not strongly connected");
    return s;
}

}  // namespace opinionlab
