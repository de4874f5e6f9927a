#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "reference.hpp"
#include "rla/cli.hpp"
#include "rla/io.hpp"
#include "rla/oracle.hpp"
#include "rla/random.hpp"

using namespace rla;

namespace {

class TempDir
{
public:
    TempDir()
    {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("rla-cli-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

struct Outcome
{
    int code;
    std::string log;
    std::string err;
};

Outcome invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "rla");
    std::ostringstream log, err;
    const int code = cli::run(args, log, err);
    return {code, log.str(), err.str()};
}

struct Csv
{
    std::string header;
    std::vector<std::vector<std::string>> rows;
};

Csv read_csv_text(const std::string& path)
{
    std::ifstream is(path);
    Csv c;
    std::getline(is, c.header);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        c.rows.push_back(cells);
    }
    return c;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

RealMat low_rank(Index m, Index n, Index k, std::uint64_t seed)
{
    RealVec s(k);
    for (Index j = 0; j < k; ++j)
        s(j) = 1.0 / static_cast<Real>(j + 1);
    return ortho_matrix(m, k, seed) * s.asDiagonal() * ortho_matrix(n, k, seed + 1).transpose();
}

} // namespace

// ---------------------------------------------------------------- factor commands

TEST(CliSvd, ExactRankInputIsRecovered)
{
    TempDir d;
    const RealMat A = low_rank(100, 80, 5, 11);
    write_binary<Real>(d / "a.bin", A);
    const Outcome o = invoke({"svd", "--input", d / "a.bin", "--rank", "5", "--seed", "3", "--out", d / "out"});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_NE(o.log.find("seed: 3"), std::string::npos);
    const auto j = read_manifest(d / "out");
    EXPECT_LE(j["run"]["est_error"].get<double>(), 1e-10);
    EXPECT_EQ(j["run"]["seed"], 3);
    const RealMat U = read_factor(d / "out", "U").real;
    const RealVec s = read_factor(d / "out", "sigma").real.col(0);
    const RealMat V = read_factor(d / "out", "V").real;
    EXPECT_LE(ref::spectral_norm(ref::RMat(U * s.asDiagonal() * V.transpose() - A)), 1e-12);
}

TEST(CliSvd, SyntheticExactRankEstimate)
{
    TempDir d;
    const Outcome o = invoke({"svd", "--synthetic", "exact_rank:5", "--m", "120", "--n", "90", "--rank", "5", "--seed",
                           "9", "--out", d / "o"});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_LE(read_manifest(d / "o")["run"]["est_error"].get<double>(), 1e-10);
}

TEST(CliSvd, VariantsAgreeOnAnExactRankInput)
{
    TempDir d;
    const RealMat A = low_rank(60, 50, 4, 21);
    write_binary<Real>(d / "a.bin", A);
    const std::vector<std::vector<std::string>> variants{
        {"--power", "2"},
        {"--power", "1", "--iteration", "power"},
        {"--row-extraction"},
        {"--single-pass", "--block-rows", "7"},
        {"--sketch", "ortho"},
        {"--sketch", "srft"},
        {"--sketch", "gsrft"},
    };
    int i = 0;
    for (const auto& extra : variants) {
        const std::string out = d / ("v" + std::to_string(i++));
        std::vector<std::string> args{"svd", "--input", d / "a.bin", "--rank", "4", "--seed", "5", "--out", out};
        args.insert(args.end(), extra.begin(), extra.end());
        const Outcome o = invoke(args);
        ASSERT_EQ(o.code, 0) << extra[0] << ": " << o.err;
        const MatrixData sig = read_factor(out, "sigma");
        const RealVec s = sig.is_complex ? RealVec(sig.cplx.real().col(0)) : RealVec(sig.real.col(0));
        for (Index k = 0; k < 4; ++k)
            EXPECT_NEAR(s(k), 1.0 / static_cast<Real>(k + 1), 1e-10) << extra[0];
    }
    EXPECT_EQ(read_manifest(d / "v3")["run"]["passes"], 1);
    EXPECT_EQ(read_manifest(d / "v0")["run"]["passes"], 6);
}

TEST(CliSvd, AdaptiveLaplaceRankIsNearTheOptimum)
{
    TempDir d;
    const Outcome o =
        invoke({"svd", "--synthetic", "laplace:200", "--adaptive", "--tol", "1e-8", "--seed", "4", "--out", d / "o"});
    ASSERT_EQ(o.code, 0) << o.err;
    const ref::RVec s = ref::singular_values(ref::RMat(laplace_bie_matrix(200)));
    Index k_opt = 0;
    while (k_opt < s.size() && s(k_opt) > 1e-8)
        ++k_opt;
    const auto rank = read_manifest(d / "o")["run"]["output_rank"].get<Index>();
    EXPECT_GE(rank, k_opt);
    EXPECT_LE(rank, k_opt + 10);
    // the truncated output still meets the tolerance
    const RealMat A = laplace_bie_matrix(200);
    const RealMat U = read_factor(d / "o", "U").real;
    const RealVec sg = read_factor(d / "o", "sigma").real.col(0);
    const RealMat V = read_factor(d / "o", "V").real;
    EXPECT_LE(ref::spectral_norm(ref::RMat(A - U * sg.asDiagonal() * V.transpose())), 1e-8);
}

TEST(CliEig, NystromOnAnIndefiniteInputFails)
{
    TempDir d;
    const Outcome o = invoke({"eig", "--synthetic", "signed:5", "--m", "40", "--n", "40", "--rank", "5", "--method",
                           "nystrom", "--seed", "1", "--out", d / "o"});
    EXPECT_EQ(o.code, cli::exit_numerical);
    EXPECT_NE(o.err.find("not PSD"), std::string::npos) << o.err;
    EXPECT_FALSE(fs::exists(d / "o"));
    EXPECT_TRUE(fs::is_empty(d.path()));
}

TEST(CliEig, MethodsRecoverAPsdSpectrum)
{
    TempDir d;
    const RealMat Q = ortho_matrix(50, 3, 2);
    RealVec lam(3);
    lam << 3.0, 2.0, 1.0;
    const RealMat A = Q * lam.asDiagonal() * Q.transpose();
    write_matrix_market<Real>(d / "a.mtx", A);
    for (const std::string method : {"direct", "rows", "nystrom"}) {
        const Outcome o = invoke({"eig", "--input", d / "a.mtx", "--rank", "3", "--method", method, "--seed", "8",
                               "--out", d / method});
        ASSERT_EQ(o.code, 0) << method << ": " << o.err;
        const RealVec l = read_factor(d / method, "lambda").real.col(0);
        for (Index i = 0; i < 3; ++i)
            EXPECT_NEAR(l(i), lam(i), 1e-10) << method;
    }
    const Outcome sp = invoke({"eig", "--input", d / "a.mtx", "--rank", "3", "--single-pass", "--seed", "8", "--out",
                            d / "sp"});
    ASSERT_EQ(sp.code, 0) << sp.err;
    EXPECT_EQ(read_manifest(d / "sp")["run"]["passes"], 1);
}

TEST(CliId, ColumnSkeletonReconstructs)
{
    TempDir d;
    const RealMat A = low_rank(40, 30, 6, 31);
    write_csv<Real>(d / "a.csv", A);
    const Outcome o = invoke({"id", "--input", d / "a.csv", "--rank", "6", "--seed", "2", "--out", d / "o"});
    ASSERT_EQ(o.code, 0) << o.err;
    const auto j = read_manifest(d / "o");
    EXPECT_EQ(j["index_base"], 0);
    const RealMat J = read_factor(d / "o", "J").real;
    const RealMat X = read_factor(d / "o", "X").real;
    RealMat C(40, J.rows());
    for (Index i = 0; i < J.rows(); ++i)
        C.col(i) = A.col(static_cast<Index>(J(i, 0)));
    EXPECT_LE((C * X - A).norm(), 1e-10 * A.norm());
}

TEST(CliRange, BasisIsOrthonormalAndCapturesTheRange)
{
    TempDir d;
    const RealMat A = low_rank(30, 20, 3, 41);
    write_binary<Real>(d / "a.bin", A);
    const Outcome o = invoke({"range", "--input", d / "a.bin", "--rank", "3", "--oversample", "2", "--seed", "2",
                           "--out", d / "o", "--format", "mm"});
    ASSERT_EQ(o.code, 0) << o.err;
    const RealMat Q = read_factor(d / "o", "Q").real;
    EXPECT_LE((Q.transpose() * Q - RealMat::Identity(Q.cols(), Q.cols())).norm(), 1e-12);
    EXPECT_LE(ref::projection_error<ref::RMat>(A, Q), 1e-12);
}

// ---------------------------------------------------------------- determinism and failures

TEST(CliDeterminism, LoggedSeedReproducesTheRun)
{
    TempDir d;
    const Outcome a = invoke({"svd", "--synthetic", "exp:0.8", "--m", "60", "--n", "40", "--rank", "6", "--out", d / "a"});
    ASSERT_EQ(a.code, 0) << a.err;
    const auto seed = read_manifest(d / "a")["run"]["seed"].get<std::uint64_t>();
    EXPECT_NE(a.log.find("seed: " + std::to_string(seed)), std::string::npos);
    const Outcome b = invoke({"svd", "--synthetic", "exp:0.8", "--m", "60", "--n", "40", "--rank", "6", "--seed",
                           std::to_string(seed), "--out", d / "b"});
    ASSERT_EQ(b.code, 0) << b.err;
    for (const char* f : {"U.bin", "sigma.bin", "V.bin"})
        EXPECT_EQ(slurp(d.path() / "a" / f), slurp(d.path() / "b" / f)) << f;
}

TEST(CliFailures, ConfigurationErrorsExitTwo)
{
    TempDir d;
    const std::vector<std::vector<std::string>> bad{
        {"svd", "--synthetic", "exact_rank:3", "--out", d / "o"},
        {"svd", "--synthetic", "exact_rank:3", "--rank", "3"},
        {"svd", "--synthetic", "exact_rank:3", "--adaptive", "--out", d / "o"},
        {"svd", "--synthetic", "bogus:3", "--rank", "3", "--out", d / "o"},
        {"svd", "--rank", "3", "--out", d / "o"},
        {"svd", "--synthetic", "exact_rank:3", "--rank", "3", "--sketch", "cauchy", "--out", d / "o"},
        {"svd", "--synthetic", "exact_rank:3", "--rank", "3", "--format", "hdf5", "--out", d / "o"},
        {"svd", "--synthetic", "exact_rank:3", "--rank", "3", "--m", "10", "--n", "10", "--oversample", "20",
         "--out", d / "o"},
        {"eig", "--synthetic", "exact_rank:3", "--rank", "3", "--method", "qr", "--out", d / "o"},
        {"experiment", "histogram", "--synthetic", "exact_rank:3"},
        {"bench", "--sizes", "8", "--ells", "16"},
        {"frobnicate"},
    };
    for (const auto& args : bad) {
        const Outcome o = invoke(args);
        EXPECT_EQ(o.code, cli::exit_config) << args[0] << ' ' << args.back() << ": " << o.err;
    }
    EXPECT_TRUE(fs::is_empty(d.path()));
}

TEST(CliFailures, IoErrorsExitThree)
{
    TempDir d;
    std::ofstream(d / "bad.mtx") << "%%MatrixMarket matrix array real general\n2 2\n1\n";
    for (const std::string in : {d / "missing.bin", d / "bad.mtx"}) {
        const Outcome o = invoke({"svd", "--input", in, "--rank", "1", "--out", d / "o"});
        EXPECT_EQ(o.code, cli::exit_io) << o.err;
    }
    EXPECT_FALSE(fs::exists(d / "o"));
}

TEST(CliFailures, ExistingOutputIsUntouchedOnFailure)
{
    TempDir d;
    fs::create_directories(d / "o");
    std::ofstream(d / "o/keep.txt") << "x";
    const Outcome o = invoke({"eig", "--synthetic", "signed:4", "--m", "30", "--n", "30", "--rank", "4", "--method",
                           "nystrom", "--seed", "2", "--out", d / "o"});
    EXPECT_EQ(o.code, cli::exit_numerical);
    EXPECT_TRUE(fs::exists(d / "o/keep.txt"));
    EXPECT_FALSE(fs::exists(d / "o/manifest.json"));
}

// ---------------------------------------------------------------- experiments

TEST(CliExperiment, ErrorCurveIsMonotoneAndTheEstimateDominates)
{
    TempDir d;
    const Outcome o = invoke({"experiment", "error-curve", "--synthetic", "laplace:200", "--ell-max", "60", "--seed",
                           "12", "--out", d / "c.csv"});
    ASSERT_EQ(o.code, 0) << o.err;
    const Csv c = read_csv_text(d / "c.csv");
    EXPECT_EQ(c.header, "ell,sigma_opt,err_actual,err_estimate");
    ASSERT_EQ(c.rows.size(), 60u);
    int dominated = 0;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : c.rows) {
        const double opt = std::stod(r[1]), e = std::stod(r[2]), f = std::stod(r[3]);
        EXPECT_LE(e, prev * (1.0 + 1e-6) + 1e-15);
        EXPECT_GE(e, opt * (1.0 - 1e-8));
        prev = e;
        dominated += f >= e;
    }
    EXPECT_GE(dominated, static_cast<int>(0.99 * static_cast<double>(c.rows.size())));
}

TEST(CliExperiment, HistogramPowerCurveAndBoundsHeaders)
{
    TempDir d;
    const Outcome h = invoke({"experiment", "error-hist", "--synthetic", "exp:0.8", "--m", "64", "--n", "64", "--ell",
                           "10", "--trials", "3", "--seed", "1", "--out", d / "h.csv"});
    ASSERT_EQ(h.code, 0) << h.err;
    const Csv hc = read_csv_text(d / "h.csv");
    EXPECT_EQ(hc.header, "trial,kind,ell,err");
    EXPECT_EQ(hc.rows.size(), 12u);

    const Outcome p = invoke({"experiment", "power-curve", "--synthetic", "exp:0.8", "--m", "40", "--n", "40",
                           "--ell-max", "6", "--ell-step", "2", "--q-max", "2", "--trials", "5", "--seed", "1",
                           "--out", d / "p.csv"});
    ASSERT_EQ(p.code, 0) << p.err;
    const Csv pc = read_csv_text(d / "p.csv");
    EXPECT_EQ(pc.header, "q,ell,sigma_opt,err_median");
    EXPECT_EQ(pc.rows.size(), 9u);

    const Outcome b = invoke({"experiment", "bounds", "--synthetic", "power:2", "--m", "60", "--n", "60", "--rank",
                           "6", "--trials", "50", "--q-max", "1", "--seed", "1", "--out", d / "b.csv"});
    ASSERT_EQ(b.code, 0) << b.err;
    const Csv bc = read_csv_text(d / "b.csv");
    EXPECT_EQ(bc.header, "bound,k,p,q,mc_mean,mc_se,bound_value,holds");
    ASSERT_FALSE(bc.rows.empty());
    for (const auto& r : bc.rows)
        EXPECT_EQ(r[7], "1") << r[0];
}

TEST(CliBench, RowsAndOperationRatios)
{
    TempDir d;
    const Outcome o = invoke({"bench", "--sizes", "128,256", "--ells", "8,16,32", "--no-full-svd", "--seed", "1",
                           "--out", d / "b.csv"});
    ASSERT_EQ(o.code, 0) << o.err;
    const Csv c = read_csv_text(d / "b.csv");
    EXPECT_EQ(c.header, "n,ell,gauss_seconds,srft_seconds,svd_seconds,gauss_ops,srft_ops,ops_ratio,gauss_est,srft_est");
    ASSERT_EQ(c.rows.size(), 6u);
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t i = 1; i < 3; ++i)
            EXPECT_LT(std::stod(c.rows[3 * n + i][7]), std::stod(c.rows[3 * n + i - 1][7]));
}

// ---------------------------------------------------------------- the executable

TEST(CliExecutable, ExitCodesThroughTheShell)
{
    TempDir d;
    auto status = [](const std::string& cmd) {
        const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    const std::string exe = RLA_CLI_EXE;
    EXPECT_EQ(status(exe + " --help"), 0);
    EXPECT_EQ(status(exe + " svd --synthetic exact_rank:2 --m 20 --n 20 --rank 2 --seed 1 --out " + d / "o"), 0);
    EXPECT_TRUE(fs::exists(d / "o/manifest.json"));
    EXPECT_EQ(status(exe + " svd --rank 2 --out " + d / "x"), 2);
    EXPECT_EQ(status(exe + " svd --input " + d / "none.bin" + " --rank 2 --out " + d / "x"), 3);
    EXPECT_EQ(status(exe + " eig --synthetic signed:3 --m 20 --n 20 --rank 3 --method nystrom --seed 1 --out " +
                     d / "x"),
              4);
    EXPECT_FALSE(fs::exists(d / "x"));
}
