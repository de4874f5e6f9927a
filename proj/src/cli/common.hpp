#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "rla/cli.hpp"
#include "rla/io.hpp"

namespace rla::cli {

namespace fs = std::filesystem;

struct Input
{
    MatrixData data;
    std::optional<RealVec> spectrum; ///< known singular values (synthetic inputs)
    std::string label;
};

std::uint64_t resolve_seed(const RunConfig& cfg, std::ostream& log);

/// Reads --input or builds the --synthetic matrix. With `hermitian` set the synthetic
/// matrix is symmetric with the requested eigenvalues.
Input load_input(const RunConfig& cfg, std::uint64_t seed, bool hermitian);

/// Run configuration as manifest fields.
nlohmann::json config_json(const RunConfig& cfg, std::uint64_t seed);

/// Output directory built under a temporary name and renamed on commit.
class StagedDir
{
public:
    explicit StagedDir(const fs::path& target);
    ~StagedDir();
    StagedDir(const StagedDir&) = delete;
    StagedDir& operator=(const StagedDir&) = delete;

    const fs::path& path() const { return tmp_; }
    void commit();

private:
    fs::path target_;
    fs::path tmp_;
    bool done_ = false;
};

/// Single output file with the same commit semantics; an empty target means stdout.
class StagedFile
{
public:
    explicit StagedFile(const std::string& target);
    ~StagedFile();
    StagedFile(const StagedFile&) = delete;
    StagedFile& operator=(const StagedFile&) = delete;

    std::ostream& stream();
    void commit();

private:
    fs::path target_;
    fs::path tmp_;
    std::ofstream file_;
    bool done_ = false;
};

} // namespace rla::cli
