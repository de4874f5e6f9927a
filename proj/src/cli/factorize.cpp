#include <algorithm>
#include <fstream>
#include <ostream>

#include "common.hpp"
#include "rla/bounds.hpp"
#include "rla/core.hpp"
#include "rla/error.hpp"
#include "rla/factor.hpp"
#include "rla/linear_operator.hpp"
#include "rla/rangefinder.hpp"
#include "rla/random.hpp"

namespace rla::cli {

namespace {

constexpr std::uint64_t kEstimateTag = 0xE57;

bool structured(SketchKind k)
{
    return k == SketchKind::srft || k == SketchKind::gsrft;
}

template <Scalar S>
struct StageA
{
    Mat<S> Q;
    std::int64_t passes = 0;
    Index samples = 0;
    bool saturated = false;
    std::optional<Real> est;
};

Index sample_count(const RunConfig& cfg, Index m, Index n)
{
    const Index ell = *cfg.rank + cfg.oversample;
    if (ell > std::min(m, n))
        throw DomainError("rank + oversample = " + std::to_string(ell) + " exceeds min(m, n) = " +
                          std::to_string(std::min(m, n)));
    return ell;
}

/// q rounds of A* then A, optionally re-orthonormalizing between applications.
template <Scalar S>
Mat<S> iterate(const DenseOperator<S>& op, Mat<S> Y, int q, bool stable)
{
    for (int i = 0; i < q; ++i) {
        const Mat<S> Z = op.apply_adjoint(stable ? householder_qr<S>(Y).Q : Y);
        Y = op.apply(stable ? householder_qr<S>(Z).Q : Z);
    }
    return Y;
}

template <Scalar S>
StageA<S> stage_a(const DenseOperator<S>& op, const Mat<S>& A, const RunConfig& cfg, std::uint64_t seed)
{
    const bool stable = cfg.iteration == "subspace";
    StageA<S> out;
    if (structured(cfg.sketch)) {
        if constexpr (is_complex_v<S>) {
            if (cfg.adaptive) {
                const RangeBasis<Complex> b = structured_fixed_precision<Complex>(A, *cfg.tol, cfg.probes, seed,
                                                                                  cfg.sketch);
                return {b.Q, b.passes, b.samples_used, b.saturated, b.est_error};
            }
            const Index ell = sample_count(cfg, A.rows(), A.cols());
            const CplxMat Y = iterate<Complex>(op, structured_sample<Complex>(A, ell, seed, cfg.sketch),
                                               cfg.power_q, stable);
            return {orthonormalize<Complex>(Y, kOrthTol), 1 + 2 * cfg.power_q, ell, false, std::nullopt};
        } else {
            throw DomainError("structured sketches run in complex arithmetic");
        }
    }
    if (cfg.adaptive) {
        AdaptiveRangeFinder<S> f(op, *cfg.tol, cfg.probes, seed, 8, cfg.alpha);
        f.run();
        const RangeBasis<S> b = f.result();
        return {b.Q, b.passes, b.samples_used, b.saturated, b.est_error};
    }
    const Index ell = sample_count(cfg, A.rows(), A.cols());
    if (cfg.sketch == SketchKind::ortho) {
        const Mat<S> Omega = dense_test_matrix<S>(SketchKind::ortho, A.cols(), ell, seed);
        const Mat<S> Y = iterate<S>(op, op.apply(Omega), cfg.power_q, stable);
        return {orthonormalize<S>(Y, kOrthTol), 1 + 2 * cfg.power_q, ell, false, std::nullopt};
    }
    RangeBasis<S> b;
    if (cfg.power_q == 0)
        b = randomized_range_finder<S>(op, ell, seed);
    else if (stable)
        b = subspace_iteration_range<S>(op, ell, cfg.power_q, seed);
    else
        b = power_iteration_range<S>(op, ell, cfg.power_q, seed);
    return {b.Q, b.passes, b.samples_used, b.saturated, std::nullopt};
}

/// Posterior estimate for the basis; drawn from a fixed tag so reruns agree.
template <Scalar S>
Real basis_estimate(const Mat<S>& A, const Mat<S>& Q, const RunConfig& cfg, std::uint64_t seed)
{
    const DenseOperator<S> op(A);
    return posterior_error_estimate<S>(op, Q, cfg.probes, cfg.alpha, derive_seed(seed, kEstimateTag));
}

void print_bounds(std::ostream& log, const Input& in, const RunConfig& cfg, Index m, Index n)
{
    if (!in.spectrum || !cfg.rank || cfg.adaptive || cfg.sketch != SketchKind::gaussian)
        return;
    SpectrumView s{*in.spectrum, m, n};
    const Index k = *cfg.rank;
    const Index p = cfg.oversample;
    log << "bounds (k = " << k << ", p = " << p << ", q = " << cfg.power_q << "):\n";
    log << "  sigma_{k+1}                  " << s.at(k + 1) << '\n';
    auto line = [&](const char* name, auto&& f) {
        try {
            log << "  " << name << f() << '\n';
        } catch (const DomainError&) {
        }
    };
    if (cfg.power_q == 0) {
        line("mean spectral bound          ", [&] { return gauss_mean_spectral(k, p, s); });
        line("mean Frobenius bound         ", [&] { return gauss_mean_frobenius(k, p, s); });
        line("deviation bound (6 p^-p)     ", [&] { return gauss_deviation_simplified_p(k, p, s).value; });
    } else {
        line("power scheme mean bound      ", [&] { return power_scheme_bound(k, p, cfg.power_q, s); });
    }
}

template <Scalar S>
SampleBundle<S> streamed_bundle(const RunConfig& cfg, const Mat<S>& A, Index ell, Index ell_tilde,
                                std::uint64_t seed)
{
    if (cfg.input) {
        const fs::path p(*cfg.input);
        const FileFormat f = format_from_extension(p);
        if (f == FileFormat::binary || f == FileFormat::csv) {
            RowBlockStream<S> st = stream_row_blocks<S>(p, cfg.block_rows);
            return sketch_stream<S>(st, ell, ell_tilde, seed);
        }
    }
    RowBlockStream<S> st = stream_memory<S>(A, cfg.block_rows);
    return sketch_stream<S>(st, ell, ell_tilde, seed);
}

struct RunSummary
{
    Index basis_size = 0;
    Index samples = 0;
    std::int64_t passes = 0;
    Real est = 0.0;
    bool saturated = false;
    Index output_rank = 0;
};

nlohmann::json run_fields(const RunConfig& cfg, std::uint64_t seed, Index m, Index n, const RunSummary& r)
{
    nlohmann::json j = config_json(cfg, seed);
    j["rows"] = m;
    j["cols"] = n;
    j["basis_size"] = r.basis_size;
    j["samples_used"] = r.samples;
    j["passes"] = r.passes;
    j["est_error"] = r.est;
    j["saturated"] = r.saturated;
    j["output_rank"] = r.output_rank;
    return j;
}

void print_summary(std::ostream& log, const RunSummary& r)
{
    log << "basis size: " << r.basis_size << '\n';
    log << "samples: " << r.samples << '\n';
    log << "passes: " << r.passes << '\n';
    log << "posterior estimate: " << r.est << '\n';
    if (r.saturated)
        log << "warning: basis saturated before reaching the tolerance\n";
    log << "output rank: " << r.output_rank << '\n';
}

template <typename F>
int with_field(const Input& in, const RunConfig& cfg, F&& f)
{
    if (in.data.is_complex)
        return f(in.data.cplx);
    if (structured(cfg.sketch))
        return f(CplxMat(in.data.real.cast<Complex>()));
    return f(in.data.real);
}

Index keep_rank(const RunConfig& cfg, Index current)
{
    return cfg.truncate ? std::min(*cfg.rank, current) : current;
}

// Adaptive runs drop trailing terms while est + |value_{k+1}| stays within tol, so the
// output keeps the error guarantee of the basis.
Index budget_rank(const RunConfig& cfg, const RealVec& values, Real est)
{
    const Index n = values.size();
    if (!cfg.adaptive || !(est <= *cfg.tol))
        return n;
    Index k = n;
    while (k > 0 && est + std::abs(values(k - 1)) <= *cfg.tol)
        --k;
    return k;
}

// ---------------------------------------------------------------- commands

template <Scalar S>
int svd_impl(const Mat<S>& A, const Input& in, const RunConfig& cfg, std::uint64_t seed, std::ostream& log)
{
    const DenseOperator<S> op(A);
    RunSummary r;
    PartialSVD<S> f;
    Mat<S> Q;
    if (cfg.single_pass) {
        const Index ell = sample_count(cfg, A.rows(), A.cols());
        const SampleBundle<S> b = streamed_bundle<S>(cfg, A, ell, ell, seed);
        f = svd_one_pass_general<S>(b);
        Q = b.Q;
        r.samples = 2 * ell;
        r.passes = 1;
    } else {
        StageA<S> a = stage_a<S>(op, A, cfg, seed);
        op.reset_counters();
        f = cfg.row_extraction ? svd_via_row_extraction<S>(A, a.Q) : direct_svd<S>(op, a.Q);
        Q = std::move(a.Q);
        r.samples = a.samples;
        r.passes = a.passes + op.counters().passes;
        r.saturated = a.saturated;
        if (a.est)
            r.est = *a.est;
        else
            r.est = basis_estimate<S>(A, Q, cfg, seed);
    }
    if (cfg.single_pass)
        r.est = basis_estimate<S>(A, Q, cfg, seed);
    f = truncate_rank<S>(f, keep_rank(cfg, f.rank()));
    f = truncate_rank<S>(f, budget_rank(cfg, f.sigma, r.est));
    r.basis_size = Q.cols();
    r.output_rank = f.rank();
    print_summary(log, r);
    print_bounds(log, in, cfg, A.rows(), A.cols());

    StagedDir dir(cfg.out);
    write_factors<S>(f, dir.path(), cfg.format, FactorMeta{run_fields(cfg, seed, A.rows(), A.cols(), r)});
    dir.commit();
    log << "wrote " << cfg.out << '\n';
    return exit_ok;
}

template <Scalar S>
int eig_impl(const Mat<S>& A, const Input& in, const RunConfig& cfg, std::uint64_t seed, std::ostream& log)
{
    if (A.rows() != A.cols())
        throw DomainError("eig needs a square matrix, got " + std::to_string(A.rows()) + " x " +
                          std::to_string(A.cols()));
    const DenseOperator<S> op(A);
    RunSummary r;
    PartialEig<S> f;
    std::optional<Mat<S>> F;
    Mat<S> Q;
    if (cfg.single_pass) {
        const Index ell = sample_count(cfg, A.rows(), A.cols());
        const SampleBundle<S> b = streamed_bundle<S>(cfg, A, ell, 0, seed);
        const OnePassEig<S> e = eig_one_pass<S>(b);
        log << "one-pass: tau_min = " << e.diag.tau_min << ", cond = " << e.diag.cond << '\n';
        if (e.diag.ill_conditioned)
            log << "warning: Q* Omega is ill-conditioned\n";
        f = e.eig;
        Q = b.Q;
        r.samples = ell;
        r.passes = 1;
        r.est = basis_estimate<S>(A, Q, cfg, seed);
    } else {
        StageA<S> a = stage_a<S>(op, A, cfg, seed);
        op.reset_counters();
        if (cfg.method == "nystrom") {
            NystromResult<S> ny = eig_nystrom<S>(op, a.Q, true);
            f = std::move(ny.eig);
            F = std::move(ny.factors.F);
        } else if (cfg.method == "rows") {
            f = eig_via_row_extraction<S>(A, a.Q);
        } else {
            f = direct_eig_hermitian<S>(op, a.Q);
        }
        Q = std::move(a.Q);
        r.samples = a.samples;
        r.passes = a.passes + op.counters().passes;
        r.saturated = a.saturated;
        r.est = a.est ? *a.est : basis_estimate<S>(A, Q, cfg, seed);
    }
    f = truncate_rank<S>(f, keep_rank(cfg, f.rank()));
    f = truncate_rank<S>(f, budget_rank(cfg, f.lambda, r.est));
    r.basis_size = Q.cols();
    r.output_rank = f.rank();
    print_summary(log, r);
    print_bounds(log, in, cfg, A.rows(), A.cols());

    StagedDir dir(cfg.out);
    nlohmann::json j =
        write_factors<S>(f, dir.path(), cfg.format, FactorMeta{run_fields(cfg, seed, A.rows(), A.cols(), r)});
    if (F) {
        const std::string file = "F" + extension_for(cfg.format);
        write_matrix<S>(dir.path() / file, *F, cfg.format);
        j["kind"] = "nystrom";
        j["factors"]["F"] = {{"file", file}, {"rows", F->rows()}, {"cols", F->cols()}};
        std::ofstream os(dir.path() / "manifest.json", std::ios::trunc);
        os << j.dump(2) << '\n';
        if (!os)
            throw IoError("cannot rewrite manifest");
    }
    dir.commit();
    log << "wrote " << cfg.out << '\n';
    return exit_ok;
}

template <Scalar S>
int id_impl(const Mat<S>& A, const Input& in, const RunConfig& cfg, std::uint64_t seed, std::ostream& log)
{
    const DenseOperator<S> op(A);
    StageA<S> a = stage_a<S>(op, A, cfg, seed);
    op.reset_counters();
    const Mat<S> B = op.apply_adjoint(a.Q).adjoint();
    const Index k = keep_rank(cfg, std::min(B.rows(), B.cols()));
    const InterpolativeDecomp<S> id = column_id<S>(B, k);
    RunSummary r;
    r.samples = a.samples;
    r.passes = a.passes + op.counters().passes;
    r.saturated = a.saturated;
    r.est = a.est ? *a.est : basis_estimate<S>(A, a.Q, cfg, seed);
    r.basis_size = a.Q.cols();
    r.output_rank = static_cast<Index>(id.J.size());
    print_summary(log, r);
    log << "refinement swaps: " << id.swaps << '\n';
    print_bounds(log, in, cfg, A.rows(), A.cols());

    StagedDir dir(cfg.out);
    write_factors<S>(id, dir.path(), cfg.format, FactorMeta{run_fields(cfg, seed, A.rows(), A.cols(), r)});
    dir.commit();
    log << "wrote " << cfg.out << '\n';
    return exit_ok;
}

template <Scalar S>
int range_impl(const Mat<S>& A, const Input& in, const RunConfig& cfg, std::uint64_t seed, std::ostream& log)
{
    const DenseOperator<S> op(A);
    StageA<S> a = stage_a<S>(op, A, cfg, seed);
    op.reset_counters();
    const Mat<S> B = op.apply_adjoint(a.Q).adjoint();
    const PartialQR<S> qr = convert_cb_qr<S>(a.Q, B);
    RunSummary r;
    r.samples = a.samples;
    r.passes = a.passes + op.counters().passes;
    r.saturated = a.saturated;
    r.est = a.est ? *a.est : basis_estimate<S>(A, a.Q, cfg, seed);
    r.basis_size = a.Q.cols();
    r.output_rank = qr.Q.cols();
    print_summary(log, r);
    print_bounds(log, in, cfg, A.rows(), A.cols());

    StagedDir dir(cfg.out);
    write_factors<S>(qr, dir.path(), cfg.format, FactorMeta{run_fields(cfg, seed, A.rows(), A.cols(), r)});
    dir.commit();
    log << "wrote " << cfg.out << '\n';
    return exit_ok;
}

} // namespace

int cmd_svd(const RunConfig& cfg, std::ostream& log)
{
    const std::uint64_t seed = resolve_seed(cfg, log);
    const Input in = load_input(cfg, seed, false);
    return with_field(in, cfg, [&](const auto& A) { return svd_impl(A, in, cfg, seed, log); });
}

int cmd_eig(const RunConfig& cfg, std::ostream& log)
{
    const std::uint64_t seed = resolve_seed(cfg, log);
    const Input in = load_input(cfg, seed, true);
    return with_field(in, cfg, [&](const auto& A) { return eig_impl(A, in, cfg, seed, log); });
}

int cmd_id(const RunConfig& cfg, std::ostream& log)
{
    const std::uint64_t seed = resolve_seed(cfg, log);
    const Input in = load_input(cfg, seed, false);
    return with_field(in, cfg, [&](const auto& A) { return id_impl(A, in, cfg, seed, log); });
}

int cmd_range(const RunConfig& cfg, std::ostream& log)
{
    const std::uint64_t seed = resolve_seed(cfg, log);
    const Input in = load_input(cfg, seed, false);
    return with_field(in, cfg, [&](const auto& A) { return range_impl(A, in, cfg, seed, log); });
}

} // namespace rla::cli
