#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rla/io.hpp"
#include "rla/sketch.hpp"
#include "rla/types.hpp"

namespace rla::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_unexpected = 1,
    exit_config = 2,
    exit_io = 3,
    exit_numerical = 4,
};

struct RunConfig
{
    std::string command; ///< svd, eig, id, range, experiment, bench
    std::string mode;    ///< experiment mode

    std::optional<std::string> input;
    std::optional<std::string> synthetic; ///< e.g. exact_rank:5, exp:0.9, laplace:200
    Index m = 200;
    Index n = 200;

    std::optional<Index> rank;
    Index oversample = 5;
    int power_q = 0;
    std::string iteration = "subspace"; ///< power | subspace, used when power_q > 0
    SketchKind sketch = SketchKind::gaussian;
    bool adaptive = false;
    std::optional<Real> tol;
    int probes = 10;
    Real alpha = 10.0;
    std::optional<std::uint64_t> seed;
    bool truncate = false;
    bool single_pass = false;
    bool row_extraction = false;
    std::string method = "direct"; ///< eig: direct | rows | nystrom
    Index block_rows = 64;

    std::string out;
    FileFormat format = FileFormat::binary;

    // experiment and bench
    Index ell = 20;
    Index ell_max = 150;
    Index ell_step = 1;
    int trials = 100;
    int q_max = 3;
    std::vector<Index> sizes{256, 512, 1024};
    std::vector<Index> ells{16, 32, 64};
    bool full_svd = true;
};

/// Throws DomainError on inconsistent settings.
void validate(const RunConfig& cfg);

int cmd_svd(const RunConfig& cfg, std::ostream& log);
int cmd_eig(const RunConfig& cfg, std::ostream& log);
int cmd_id(const RunConfig& cfg, std::ostream& log);
int cmd_range(const RunConfig& cfg, std::ostream& log);
int cmd_experiment(const RunConfig& cfg, std::ostream& log);
int cmd_bench(const RunConfig& cfg, std::ostream& log);

/// Validates and dispatches; maps exceptions to exit codes and prints the message to err.
int execute(const RunConfig& cfg, std::ostream& log, std::ostream& err);

/// Full command line (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& log, std::ostream& err);

} // namespace rla::cli
