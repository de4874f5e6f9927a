#include <algorithm>
#include <chrono>
#include <limits>
#include <numbers>
#include <ostream>
#include <vector>

#include "common.hpp"
#include "rla/bounds.hpp"
#include "rla/core.hpp"
#include "rla/error.hpp"
#include "rla/factor.hpp"
#include "rla/linear_operator.hpp"
#include "rla/oracle.hpp"
#include "rla/rangefinder.hpp"
#include "rla/random.hpp"
#include "rla/sketch.hpp"

namespace rla::cli {

namespace {

const Real kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);

Real median(std::vector<Real> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

Real sigma_at(const RealVec& s, Index j)
{
    return j < s.size() ? s(j) : 0.0;
}

template <typename F>
int with_data(const Input& in, F&& f)
{
    if (in.data.is_complex)
        return f(in.data.cplx);
    return f(in.data.real);
}

// ---------------------------------------------------------------- error-curve

template <Scalar S>
void error_curve(const Mat<S>& A, const RunConfig& cfg, std::uint64_t seed, std::ostream& os)
{
    const DenseOperator<S> op(A);
    const RealVec sigma = singular_values<S>(A);
    const Index ell_max = std::min(cfg.ell_max, std::min(A.rows(), A.cols()));
    AdaptiveRangeFinder<S> f(op, std::numeric_limits<Real>::min(), cfg.probes, seed, 8, cfg.alpha);
    while (f.basis_size() < ell_max && f.step()) {
    }
    os << "ell,sigma_opt,err_actual,err_estimate\n";
    for (const AdaptiveLogEntry& e : f.log()) {
        const Index ell = e.basis_size;
        if (ell == 0 || ell % cfg.ell_step != 0)
            continue;
        const Mat<S> Q = f.basis().leftCols(ell);
        os << ell << ',' << sigma_at(sigma, ell) << ',' << exact_projection_error<S>(A, Q, Norm::spectral) << ','
           << cfg.alpha * kSqrt2OverPi * e.max_probe_norm << '\n';
    }
}

// ---------------------------------------------------------------- error-hist

template <Scalar S>
Real sketch_error(const Mat<S>& A, SketchKind kind, Index ell, std::uint64_t seed)
{
    if (kind == SketchKind::srft || kind == SketchKind::gsrft) {
        const RangeBasis<Complex> b = fast_range_finder<S>(A, ell, seed, kind);
        return exact_projection_error<Complex>(CplxMat(A.template cast<Complex>()), b.Q, Norm::spectral);
    }
    const Mat<S> Omega = dense_test_matrix<S>(kind, A.cols(), ell, seed);
    const Mat<S> Q = orthonormalize<S>(Mat<S>(A * Omega), kOrthTol);
    return exact_projection_error<S>(A, Q, Norm::spectral);
}

template <Scalar S>
void error_hist(const Mat<S>& A, const RunConfig& cfg, std::uint64_t seed, std::ostream& os)
{
    if (cfg.ell > std::min(A.rows(), A.cols()))
        throw DomainError("--ell exceeds min(m, n)");
    const SketchKind kinds[] = {SketchKind::gaussian, SketchKind::ortho, SketchKind::srft, SketchKind::gsrft};
    os << "trial,kind,ell,err\n";
    for (int t = 0; t < cfg.trials; ++t) {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(t));
        for (SketchKind k : kinds)
            os << t << ',' << to_string(k) << ',' << cfg.ell << ',' << sketch_error<S>(A, k, cfg.ell, s) << '\n';
    }
}

// ---------------------------------------------------------------- power-curve

template <Scalar S>
void power_curve(const Mat<S>& A, const RunConfig& cfg, std::uint64_t seed, std::ostream& os)
{
    const DenseOperator<S> op(A);
    const RealVec sigma = singular_values<S>(A);
    const Index ell_max = std::min(cfg.ell_max, std::min(A.rows(), A.cols()));
    os << "q,ell,sigma_opt,err_median\n";
    for (int q = 0; q <= cfg.q_max; ++q)
        for (Index ell = cfg.ell_step; ell <= ell_max; ell += cfg.ell_step) {
            std::vector<Real> errs;
            for (int t = 0; t < cfg.trials; ++t) {
                const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(t));
                const RangeBasis<S> b = subspace_iteration_range<S>(op, ell, q, s);
                errs.push_back(exact_projection_error<S>(A, b.Q, Norm::spectral));
            }
            os << q << ',' << ell << ',' << sigma_at(sigma, ell) << ',' << median(errs) << '\n';
        }
}

// ---------------------------------------------------------------- bounds

template <Scalar S>
void bounds_table(const Mat<S>& A, const RunConfig& cfg, std::uint64_t seed, std::ostream& os)
{
    const Index m = A.rows();
    const Index n = A.cols();
    const Index k = cfg.rank.value_or(10);
    const Index p = cfg.oversample;
    if (k + p > std::min(m, n))
        throw DomainError("rank + oversample exceeds min(m, n)");
    const DenseOperator<S> op(A);
    const SpectrumView s{singular_values<S>(A), m, n};

    auto mc = [&](int q, Norm norm) {
        RunningStats st;
        for (int t = 0; t < cfg.trials; ++t) {
            const std::uint64_t ts = derive_seed(seed, static_cast<std::uint64_t>(t));
            const RangeBasis<S> b =
                q == 0 ? randomized_range_finder<S>(op, k + p, ts) : subspace_iteration_range<S>(op, k + p, q, ts);
            st.add(exact_projection_error<S>(A, b.Q, norm));
        }
        return st;
    };
    os << "bound,k,p,q,mc_mean,mc_se,bound_value,holds\n";
    auto row = [&](const std::string& name, int q, const RunningStats& st, Real bound) {
        os << name << ',' << k << ',' << p << ',' << q << ',' << st.mean() << ',' << st.std_error() << ',' << bound
           << ',' << (st.mean() <= bound ? 1 : 0) << '\n';
    };
    const RunningStats fro = mc(0, Norm::frobenius);
    const RunningStats spec = mc(0, Norm::spectral);
    row("mean_frobenius", 0, fro, gauss_mean_frobenius(k, p, s));
    if (k >= 2)
        row("mean_spectral", 0, spec, gauss_mean_spectral(k, p, s));
    row("intro_mean", 0, spec, intro_mean_bound(k, p, m, n, s.at(k + 1)));
    for (int q = 1; q <= cfg.q_max; ++q) {
        const RunningStats pq = mc(q, Norm::spectral);
        row("power_scheme", q, pq, power_scheme_bound(k, p, q, s));
        if (k >= 2)
            row("intro_power", q, pq, intro_power_bound(k, q, m, n, s.at(k + 1)));
    }
}

} // namespace

int cmd_experiment(const RunConfig& cfg, std::ostream& log)
{
    const std::uint64_t seed = resolve_seed(cfg, log);
    const Input in = load_input(cfg, seed, false);
    StagedFile out(cfg.out);
    std::ostream& os = out.stream();
    os.precision(17);
    with_data(in, [&](const auto& A) {
        using S = typename std::decay_t<decltype(A)>::Scalar;
        if (cfg.mode == "error-curve")
            error_curve<S>(A, cfg, seed, os);
        else if (cfg.mode == "error-hist")
            error_hist<S>(A, cfg, seed, os);
        else if (cfg.mode == "power-curve")
            power_curve<S>(A, cfg, seed, os);
        else
            bounds_table<S>(A, cfg, seed, os);
        return 0;
    });
    out.commit();
    if (!cfg.out.empty())
        log << "wrote " << cfg.out << '\n';
    return exit_ok;
}

// ---------------------------------------------------------------- bench

int cmd_bench(const RunConfig& cfg, std::ostream& log)
{
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };

    const std::uint64_t seed = resolve_seed(cfg, log);
    for (Index n : cfg.sizes)
        for (Index ell : cfg.ells)
            if (ell > n)
                throw DomainError("bench: ell = " + std::to_string(ell) + " exceeds n = " + std::to_string(n));
    log << "timings are hardware dependent and non-normative; operation counts are exact\n";

    StagedFile out(cfg.out);
    std::ostream& os = out.stream();
    os.precision(17);
    os << "n,ell,gauss_seconds,srft_seconds,svd_seconds,gauss_ops,srft_ops,ops_ratio,gauss_est,srft_est\n";
    for (Index n : cfg.sizes) {
        const RealMat A = gaussian_matrix(n, n, derive_seed(seed, static_cast<std::uint64_t>(n)));
        const CplxMat Ac = A.cast<Complex>();
        const DenseOperator<Real> op(A);
        const DenseOperator<Complex> opc(Ac);
        double svd_seconds = 0.0;
        if (cfg.full_svd) {
            const auto t0 = clock::now();
            const RealVec s = singular_values<Real>(A);
            svd_seconds = seconds(t0, clock::now());
            (void)s;
        }
        for (Index ell : cfg.ells) {
            const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(ell));

            op.reset_counters();
            auto t0 = clock::now();
            const RangeBasis<Real> gb = randomized_range_finder<Real>(op, ell, s);
            const std::int64_t gauss_ops = op.counters().scalar_ops;
            const PartialSVD<Real> gf = direct_svd<Real>(op, gb.Q);
            const double gauss_seconds = seconds(t0, clock::now());

            const SrftOperator srft(n, ell, s);
            srft.reset_ops();
            t0 = clock::now();
            const CplxMat Y = srft.apply_rows<Real>(A);
            const auto srft_ops = static_cast<std::int64_t>(srft.op_count());
            const CplxMat Q = orthonormalize<Complex>(Y, kOrthTol);
            const PartialSVD<Complex> sf = direct_svd<Complex>(opc, Q);
            const double srft_seconds = seconds(t0, clock::now());
            (void)gf;
            (void)sf;

            const Real gauss_est = posterior_error_estimate<Real>(op, gb.Q, cfg.probes, cfg.alpha, derive_seed(s, 1));
            const Real srft_est = posterior_error_estimate<Complex>(opc, Q, cfg.probes, cfg.alpha, derive_seed(s, 1));
            os << n << ',' << ell << ',' << gauss_seconds << ',' << srft_seconds << ',' << svd_seconds << ','
               << gauss_ops << ',' << srft_ops << ','
               << static_cast<double>(srft_ops) / static_cast<double>(gauss_ops) << ',' << gauss_est << ','
               << srft_est << '\n';
        }
    }
    out.commit();
    if (!cfg.out.empty())
        log << "wrote " << cfg.out << '\n';
    return exit_ok;
}

} // namespace rla::cli
