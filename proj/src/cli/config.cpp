#include <algorithm>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "common.hpp"
#include "rla/error.hpp"
#include "rla/oracle.hpp"
#include "rla/random.hpp"

namespace rla::cli {

namespace {

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string part;
    std::istringstream is(s);
    while (std::getline(is, part, sep))
        out.push_back(part);
    return out;
}

Real parse_real(const std::string& s, const std::string& what)
{
    try {
        std::size_t used = 0;
        const Real v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DomainError("bad " + what + " '" + s + "'");
    }
}

Index parse_index(const std::string& s, const std::string& what)
{
    const Real v = parse_real(s, what);
    if (v != std::floor(v) || v < 0)
        throw DomainError("bad " + what + " '" + s + "'");
    return static_cast<Index>(v);
}

std::string random_suffix()
{
    std::random_device rd;
    std::ostringstream os;
    os << std::hex << rd() << rd();
    return os.str();
}

void add_input_options(CLI::App* sc, RunConfig& cfg)
{
    sc->add_option("--input", cfg.input, "matrix file (.mtx, .bin, .csv)");
    sc->add_option("--synthetic", cfg.synthetic,
                   "exact_rank:K | power:ALPHA | exp:RHO | flat:COUNT:LEVEL | signed:K | laplace:N");
    sc->add_option("--m", cfg.m, "rows of a synthetic matrix");
    sc->add_option("--n", cfg.n, "columns of a synthetic matrix");
    sc->add_option("--seed", cfg.seed, "random seed (printed when drawn)");
}

void add_sketch_options(CLI::App* sc, RunConfig& cfg)
{
    sc->add_option("--rank", cfg.rank, "target rank k");
    sc->add_option("--oversample", cfg.oversample, "oversampling p")->capture_default_str();
    sc->add_option("--power", cfg.power_q, "power iterations q")->capture_default_str();
    sc->add_option("--iteration", cfg.iteration, "power | subspace")->capture_default_str();
    sc->add_option_function<std::string>(
        "--sketch", [&cfg](const std::string& s) { cfg.sketch = parse_sketch_kind(s); },
        "gauss | ortho | srft | gsrft");
    sc->add_flag("--adaptive", cfg.adaptive, "fixed-precision mode (needs --tol)");
    sc->add_option("--tol", cfg.tol, "target residual for --adaptive");
    sc->add_option("--probes", cfg.probes, "probe vectors r")->capture_default_str();
    sc->add_option("--alpha", cfg.alpha, "estimator inflation")->capture_default_str();
}

void add_output_options(CLI::App* sc, RunConfig& cfg)
{
    sc->add_option("--out", cfg.out, "output directory")->required();
    sc->add_option_function<std::string>(
        "--format", [&cfg](const std::string& s) { cfg.format = parse_file_format(s); }, "mm | binary | csv");
    sc->add_flag("--truncate", cfg.truncate, "truncate the factorization to rank k");
}

} // namespace

// ---------------------------------------------------------------- seeds and inputs

std::uint64_t resolve_seed(const RunConfig& cfg, std::ostream& log)
{
    std::uint64_t seed = 0;
    if (cfg.seed) {
        seed = *cfg.seed;
    } else {
        std::random_device rd;
        seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }
    log << "seed: " << seed << '\n';
    return seed;
}

Input load_input(const RunConfig& cfg, std::uint64_t seed, bool hermitian)
{
    Input in;
    if (cfg.input) {
        in.data = read_matrix(*cfg.input);
        in.label = *cfg.input;
        return in;
    }
    const auto parts = split(*cfg.synthetic, ':');
    const std::string kind = parts.empty() ? "" : parts[0];
    auto arg = [&](std::size_t i) -> const std::string& {
        if (parts.size() <= i)
            throw DomainError("synthetic spec '" + *cfg.synthetic + "' is missing a parameter");
        return parts[i];
    };
    in.label = "synthetic:" + *cfg.synthetic;
    in.data.is_complex = false;
    const std::uint64_t data_seed = derive_seed(seed, 0xDA7A);

    if (kind == "laplace") {
        in.data.real = laplace_bie_matrix(parse_index(arg(1), "node count"));
        return in;
    }

    SyntheticSpec spec;
    spec.m = cfg.m;
    spec.n = cfg.n;
    spec.seed = data_seed;
    bool signed_values = false;
    if (kind == "exact_rank") {
        spec.kind = SpectrumKind::exact_rank;
        spec.rank = parse_index(arg(1), "rank");
    } else if (kind == "power") {
        spec.kind = SpectrumKind::power_decay;
        spec.alpha = parse_real(arg(1), "decay exponent");
    } else if (kind == "exp") {
        spec.kind = SpectrumKind::exp_decay;
        spec.rho = parse_real(arg(1), "decay ratio");
        if (!(spec.rho > 0.0 && spec.rho < 1.0))
            throw DomainError("exp decay ratio must lie in (0, 1)");
    } else if (kind == "flat") {
        spec.kind = SpectrumKind::flat;
        spec.count = parse_index(arg(1), "flat count");
        spec.level = parse_real(arg(2), "flat level");
    } else if (kind == "signed") {
        spec.kind = SpectrumKind::exact_rank;
        spec.rank = parse_index(arg(1), "rank");
        signed_values = true;
    } else {
        throw DomainError("unknown synthetic kind '" + kind + "'");
    }

    if (hermitian) {
        if (cfg.m != cfg.n)
            throw DomainError("a Hermitian synthetic matrix needs --m equal to --n");
        RealVec lambda = synthetic_spectrum(spec);
        if (signed_values)
            for (Index j = 1; j < lambda.size(); j += 2)
                lambda(j) = -lambda(j);
        in.data.real = synthetic_hermitian(lambda, data_seed);
        RealVec s = lambda.cwiseAbs();
        std::sort(s.data(), s.data() + s.size(), std::greater<>());
        in.spectrum = s;
        return in;
    }
    const SyntheticMatrix sm = synthetic_matrix(spec);
    in.data.real = sm.A;
    in.spectrum = sm.spectrum.sigma;
    return in;
}

nlohmann::json config_json(const RunConfig& cfg, std::uint64_t seed)
{
    nlohmann::json j;
    j["command"] = cfg.command;
    if (cfg.input)
        j["input"] = *cfg.input;
    if (cfg.synthetic) {
        j["synthetic"] = *cfg.synthetic;
        j["m"] = cfg.m;
        j["n"] = cfg.n;
    }
    j["seed"] = seed;
    if (cfg.rank)
        j["rank"] = *cfg.rank;
    j["oversample"] = cfg.oversample;
    j["power_q"] = cfg.power_q;
    j["iteration"] = cfg.iteration;
    j["sketch"] = to_string(cfg.sketch);
    j["adaptive"] = cfg.adaptive;
    if (cfg.tol)
        j["tol"] = *cfg.tol;
    j["probes"] = cfg.probes;
    j["alpha"] = cfg.alpha;
    j["truncate"] = cfg.truncate;
    j["single_pass"] = cfg.single_pass;
    j["row_extraction"] = cfg.row_extraction;
    if (cfg.command == "eig")
        j["method"] = cfg.method;
    j["block_rows"] = cfg.block_rows;
    return j;
}

// ---------------------------------------------------------------- staged outputs

StagedDir::StagedDir(const fs::path& target) : target_(target)
{
    const fs::path parent = target.has_parent_path() ? target.parent_path() : fs::path(".");
    if (!fs::is_directory(parent))
        throw IoError(parent.string() + ": output parent directory does not exist");
    tmp_ = parent / ("." + target.filename().string() + ".tmp-" + random_suffix());
    std::error_code ec;
    fs::create_directory(tmp_, ec);
    if (ec)
        throw IoError(tmp_.string() + ": cannot create staging directory");
}

StagedDir::~StagedDir()
{
    if (!done_) {
        std::error_code ec;
        fs::remove_all(tmp_, ec);
    }
}

void StagedDir::commit()
{
    std::error_code ec;
    if (fs::exists(target_)) {
        fs::remove_all(target_, ec);
        if (ec)
            throw IoError(target_.string() + ": cannot replace existing output");
    }
    fs::rename(tmp_, target_, ec);
    if (ec)
        throw IoError(target_.string() + ": cannot move output into place");
    done_ = true;
}

StagedFile::StagedFile(const std::string& target)
{
    if (target.empty())
        return;
    target_ = target;
    const fs::path parent = target_.has_parent_path() ? target_.parent_path() : fs::path(".");
    if (!fs::is_directory(parent))
        throw IoError(parent.string() + ": output parent directory does not exist");
    tmp_ = parent / ("." + target_.filename().string() + ".tmp-" + random_suffix());
    file_.open(tmp_, std::ios::trunc);
    if (!file_)
        throw IoError(tmp_.string() + ": cannot open for writing");
}

StagedFile::~StagedFile()
{
    if (!done_ && !tmp_.empty()) {
        file_.close();
        std::error_code ec;
        fs::remove(tmp_, ec);
    }
}

std::ostream& StagedFile::stream()
{
    return tmp_.empty() ? std::cout : static_cast<std::ostream&>(file_);
}

void StagedFile::commit()
{
    if (tmp_.empty()) {
        std::cout.flush();
        done_ = true;
        return;
    }
    file_.close();
    if (!file_)
        throw IoError(tmp_.string() + ": write failed");
    std::error_code ec;
    fs::rename(tmp_, target_, ec);
    if (ec)
        throw IoError(target_.string() + ": cannot move output into place");
    done_ = true;
}

// ---------------------------------------------------------------- validation and dispatch

void validate(const RunConfig& cfg)
{
    const bool factor_cmd =
        cfg.command == "svd" || cfg.command == "eig" || cfg.command == "id" || cfg.command == "range";
    if (cfg.command != "bench") {
        if (cfg.input.has_value() == cfg.synthetic.has_value())
            throw DomainError("give exactly one of --input and --synthetic");
    }
    if (cfg.m < 1 || cfg.n < 1)
        throw DomainError("--m and --n must be positive");
    if (cfg.oversample < 0)
        throw DomainError("--oversample must be >= 0");
    if (cfg.power_q < 0)
        throw DomainError("--power must be >= 0");
    if (cfg.iteration != "power" && cfg.iteration != "subspace")
        throw DomainError("--iteration must be power or subspace");
    if (cfg.probes < 1)
        throw DomainError("--probes must be >= 1");
    if (!(cfg.alpha > 1.0))
        throw DomainError("--alpha must exceed 1");
    if (cfg.block_rows < 1)
        throw DomainError("--block-rows must be >= 1");
    if (factor_cmd) {
        if (cfg.adaptive == cfg.rank.has_value())
            throw DomainError("give exactly one of --rank and --adaptive");
        if (cfg.adaptive && !cfg.tol)
            throw DomainError("--adaptive needs --tol");
        if (!cfg.adaptive && cfg.tol)
            throw DomainError("--tol is only used with --adaptive");
        if (cfg.tol && !(*cfg.tol > 0.0))
            throw DomainError("--tol must be positive");
        if (cfg.rank && *cfg.rank < 1)
            throw DomainError("--rank must be >= 1");
        if (cfg.adaptive && cfg.power_q > 0)
            throw DomainError("--power is not combined with --adaptive");
        if (cfg.adaptive && cfg.single_pass)
            throw DomainError("--single-pass needs --rank");
        if (cfg.adaptive && cfg.truncate)
            throw DomainError("--truncate needs --rank");
        if (cfg.truncate && cfg.command == "range")
            throw DomainError("--truncate does not apply to range");
        if (cfg.single_pass && cfg.sketch != SketchKind::gaussian)
            throw DomainError("--single-pass uses the Gaussian sketch");
        if (cfg.single_pass && cfg.power_q > 0)
            throw DomainError("--single-pass cannot use power iterations");
        if (cfg.command == "eig" && cfg.method != "direct" && cfg.method != "rows" && cfg.method != "nystrom")
            throw DomainError("--method must be direct, rows or nystrom");
        if (cfg.row_extraction && cfg.command != "svd")
            throw DomainError("--row-extraction applies to svd");
        if (cfg.single_pass && cfg.command != "svd" && cfg.command != "eig")
            throw DomainError("--single-pass applies to svd and eig");
        if (cfg.out.empty())
            throw DomainError("--out is required");
    }
    if (cfg.command == "experiment") {
        static const std::vector<std::string> modes{"error-curve", "error-hist", "power-curve", "bounds"};
        if (std::find(modes.begin(), modes.end(), cfg.mode) == modes.end())
            throw DomainError("unknown experiment mode '" + cfg.mode + "'");
        if (cfg.trials < 1 || cfg.ell < 1 || cfg.ell_max < 1 || cfg.ell_step < 1 || cfg.q_max < 0)
            throw DomainError("experiment sizes must be positive");
    }
    if (cfg.command == "bench") {
        if (cfg.sizes.empty() || cfg.ells.empty())
            throw DomainError("bench needs --sizes and --ells");
        for (Index v : cfg.sizes)
            if (v < 2)
                throw DomainError("bench sizes must be >= 2");
        for (Index v : cfg.ells)
            if (v < 1)
                throw DomainError("bench ell values must be >= 1");
    }
}

int execute(const RunConfig& cfg, std::ostream& log, std::ostream& err)
{
    try {
        validate(cfg);
        if (cfg.command == "svd")
            return cmd_svd(cfg, log);
        if (cfg.command == "eig")
            return cmd_eig(cfg, log);
        if (cfg.command == "id")
            return cmd_id(cfg, log);
        if (cfg.command == "range")
            return cmd_range(cfg, log);
        if (cfg.command == "experiment")
            return cmd_experiment(cfg, log);
        if (cfg.command == "bench")
            return cmd_bench(cfg, log);
        throw DomainError("unknown command '" + cfg.command + "'");
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_unexpected;
    }
}

int run(const std::vector<std::string>& args, std::ostream& log, std::ostream& err)
{
    RunConfig cfg;
    CLI::App app{"Randomized low-rank matrix factorizations", "rla"};
    app.require_subcommand(1);

    for (const char* name : {"svd", "eig", "id", "range"}) {
        CLI::App* sc = app.add_subcommand(name);
        add_input_options(sc, cfg);
        add_sketch_options(sc, cfg);
        add_output_options(sc, cfg);
        sc->add_option("--block-rows", cfg.block_rows, "row block size for streamed input")->capture_default_str();
        if (std::string(name) == "svd") {
            sc->add_flag("--row-extraction", cfg.row_extraction, "factor from extracted rows");
            sc->add_flag("--single-pass", cfg.single_pass, "sketch both sides in one pass");
            sc->description("partial SVD A ~= U diag(sigma) V*");
        } else if (std::string(name) == "eig") {
            sc->add_option("--method", cfg.method, "direct | rows | nystrom")->capture_default_str();
            sc->add_flag("--single-pass", cfg.single_pass, "one-pass Hermitian eigensolver");
            sc->description("partial Hermitian eigendecomposition A ~= U diag(lambda) U*");
        } else if (std::string(name) == "id") {
            sc->description("column interpolative decomposition A ~= A(:,J) X");
        } else {
            sc->description("orthonormal range basis, written as A ~= Q R");
        }
    }

    CLI::App* ex = app.add_subcommand("experiment", "error curves, histograms and bound tables as CSV");
    ex->add_option("mode", cfg.mode, "error-curve | error-hist | power-curve | bounds")->required();
    add_input_options(ex, cfg);
    add_sketch_options(ex, cfg);
    ex->add_option("--out", cfg.out, "CSV file (stdout if omitted)");
    ex->add_option("--ell", cfg.ell, "sample count")->capture_default_str();
    ex->add_option("--ell-max", cfg.ell_max, "largest sample count")->capture_default_str();
    ex->add_option("--ell-step", cfg.ell_step, "sample count step")->capture_default_str();
    ex->add_option("--trials", cfg.trials, "trials")->capture_default_str();
    ex->add_option("--q-max", cfg.q_max, "largest power exponent")->capture_default_str();

    CLI::App* bench = app.add_subcommand("bench", "timing and operation-count table (timings are non-normative)");
    bench->add_option("--sizes", cfg.sizes, "matrix sizes n (m = n)")->delimiter(',');
    bench->add_option("--ells", cfg.ells, "sample counts")->delimiter(',');
    bench->add_option("--seed", cfg.seed, "random seed");
    bench->add_option("--out", cfg.out, "CSV file (stdout if omitted)");
    bench->add_flag("!--no-full-svd", cfg.full_svd, "skip the dense SVD timing");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        return app.exit(e, log, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, log, err);
        return exit_config;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    return execute(cfg, log, err);
}

} // namespace rla::cli
