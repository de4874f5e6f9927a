#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "rla/factor.hpp"
#include "rla/types.hpp"

namespace rla {

namespace fs = std::filesystem;

/// A matrix read from disk; exactly one of the two members is populated.
struct MatrixData
{
    bool is_complex = false;
    RealMat real;
    CplxMat cplx;

    Index rows() const { return is_complex ? cplx.rows() : real.rows(); }
    Index cols() const { return is_complex ? cplx.cols() : real.cols(); }
};

enum class FileFormat { mm, binary, csv };

std::string to_string(FileFormat f);
FileFormat parse_file_format(const std::string& name);
/// .mtx / .bin / .csv
FileFormat format_from_extension(const fs::path& path);
std::string extension_for(FileFormat f);

MatrixData read_matrix_market(const fs::path& path);

/// Array format, general symmetry.
template <Scalar S>
void write_matrix_market(const fs::path& path, const Mat<S>& A);

/// Magic "RLAMAT1R" or "RLAMAT1C", int64 rows and cols, row-major little-endian doubles.
MatrixData read_binary(const fs::path& path);

template <Scalar S>
void write_binary(const fs::path& path, const Mat<S>& A);

/// One row per line, comma separated; complex cells are written as a+bi.
MatrixData read_csv(const fs::path& path);

template <Scalar S>
void write_csv(const fs::path& path, const Mat<S>& A);

/// Dispatch on the file extension.
MatrixData read_matrix(const fs::path& path);

template <Scalar S>
void write_matrix(const fs::path& path, const Mat<S>& A, FileFormat f);

/// Run metadata stored in the manifest next to the factor files.
struct FactorMeta
{
    nlohmann::json fields = nlohmann::json::object();
};

template <Scalar S>
nlohmann::json write_factors(const PartialSVD<S>& f, const fs::path& dir, FileFormat fmt, const FactorMeta& meta);
template <Scalar S>
nlohmann::json write_factors(const PartialEig<S>& f, const fs::path& dir, FileFormat fmt, const FactorMeta& meta);
template <Scalar S>
nlohmann::json write_factors(const InterpolativeDecomp<S>& f, const fs::path& dir, FileFormat fmt,
                             const FactorMeta& meta);
template <Scalar S>
nlohmann::json write_factors(const NystromFactors<S>& f, const fs::path& dir, FileFormat fmt,
                             const FactorMeta& meta);
template <Scalar S>
nlohmann::json write_factors(const PartialQR<S>& f, const fs::path& dir, FileFormat fmt, const FactorMeta& meta);

nlohmann::json read_manifest(const fs::path& dir);

/// Loads one factor listed in dir/manifest.json.
MatrixData read_factor(const fs::path& dir, const std::string& name);

/// Sequential row blocks of a matrix; every row is delivered once, in order.
template <Scalar S>
class RowBlockStream
{
public:
    class Source
    {
    public:
        virtual ~Source() = default;
        virtual Index rows() const = 0;
        virtual Index cols() const = 0;
        /// Reads rows [first, first + count).
        virtual Mat<S> read(Index first, Index count, Index block_index) = 0;
    };

    RowBlockStream(std::unique_ptr<Source> src, Index block_rows);

    Index rows() const { return src_->rows(); }
    Index cols() const { return src_->cols(); }
    Index block_rows() const { return block_rows_; }
    Index cursor() const { return cursor_; }
    bool done() const { return cursor_ >= rows(); }

    std::optional<Mat<S>> next();

private:
    std::unique_ptr<Source> src_;
    Index block_rows_;
    Index cursor_ = 0;
    Index block_index_ = 0;
};

/// Binary or CSV file, by extension.
template <Scalar S>
RowBlockStream<S> stream_row_blocks(const fs::path& path, Index block_rows);

/// Stream over an in-memory matrix (the matrix must outlive the stream).
template <Scalar S>
RowBlockStream<S> stream_memory(const Mat<S>& A, Index block_rows);

/**
 * Builds a sample bundle in one traversal of the rows.
 *
 * Per block A_b (rows r0..r1): Y(r0:r1,:) = A_b Omega and Y~ += A_b* Omega~(r0:r1,:).
 * The test matrices are those of make_bundle / make_bundle_general for the same seed.
 */
template <Scalar S>
class SinglePassSketcher
{
public:
    /// ell_tilde = 0 skips the adjoint-side sketch.
    SinglePassSketcher(Index m, Index n, Index ell, Index ell_tilde, std::uint64_t seed);

    void consume(const Mat<S>& block);
    Index rows_seen() const { return cursor_; }
    SampleBundle<S> finish();

private:
    Index m_, n_;
    Index cursor_ = 0;
    SampleBundle<S> bundle_;
};

/// Drains the stream through a SinglePassSketcher.
template <Scalar S>
SampleBundle<S> sketch_stream(RowBlockStream<S>& stream, Index ell, Index ell_tilde, std::uint64_t seed);

} // namespace rla
