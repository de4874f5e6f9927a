#include "rla/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>
#include <vector>

#include "rla/error.hpp"
#include "rla/random.hpp"

namespace rla {

namespace {

constexpr std::array<char, 8> kMagicReal{'R', 'L', 'A', 'M', 'A', 'T', '1', 'R'};
constexpr std::array<char, 8> kMagicCplx{'R', 'L', 'A', 'M', 'A', 'T', '1', 'C'};
constexpr std::streamoff kHeaderBytes = 24;

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<std::string> split_ws(const std::string& line)
{
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok)
        out.push_back(tok);
    return out;
}

std::string format_double(double x)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

bool parse_double(std::string_view s, double& out)
{
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    if (s.empty())
        return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

[[noreturn]] void fail(const fs::path& path, std::size_t line, const std::string& what)
{
    throw IoError(path.string() + ": line " + std::to_string(line) + ": " + what);
}

double parse_entry(const fs::path& path, std::size_t line, const std::string& tok)
{
    double v = 0.0;
    if (!parse_double(tok, v))
        fail(path, line, "cannot parse number '" + tok + "'");
    if (!std::isfinite(v))
        fail(path, line, "non-finite entry '" + tok + "'");
    return v;
}

std::string format_complex(const Complex& z)
{
    if (z.imag() == 0.0 && !std::signbit(z.imag()))
        return format_double(z.real());
    std::string im = format_double(z.imag());
    if (im.front() != '-')
        im = "+" + im;
    return format_double(z.real()) + im + "i";
}

bool parse_complex(std::string_view s, Complex& out)
{
    if (s.empty())
        return false;
    if (s.back() != 'i') {
        double re = 0.0;
        if (!parse_double(s, re))
            return false;
        out = Complex(re, 0.0);
        return true;
    }
    s.remove_suffix(1);
    // split at the last sign that is not an exponent sign and not at position 0
    std::size_t cut = std::string_view::npos;
    for (std::size_t i = s.size(); i-- > 1;) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            cut = i;
            break;
        }
    }
    double re = 0.0, im = 0.0;
    if (cut == std::string_view::npos) {
        if (!parse_double(s, im))
            return false;
        out = Complex(0.0, im);
        return true;
    }
    if (!parse_double(s.substr(0, cut), re) || !parse_double(s.substr(cut), im))
        return false;
    out = Complex(re, im);
    return true;
}

template <typename T>
void put_le(std::ostream& os, T v)
{
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        os.write(bytes.data(), sizeof(T));
    } else {
        os.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
}

template <typename T>
T from_le(const char* p)
{
    std::array<char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
}

struct BinaryHeader
{
    bool is_complex = false;
    Index rows = 0;
    Index cols = 0;
};

BinaryHeader read_binary_header(std::istream& is, const fs::path& path)
{
    std::array<char, kHeaderBytes> raw{};
    is.read(raw.data(), kHeaderBytes);
    if (is.gcount() != kHeaderBytes)
        throw IoError(path.string() + ": truncated binary header");
    BinaryHeader h;
    if (std::equal(kMagicReal.begin(), kMagicReal.end(), raw.begin()))
        h.is_complex = false;
    else if (std::equal(kMagicCplx.begin(), kMagicCplx.end(), raw.begin()))
        h.is_complex = true;
    else
        throw IoError(path.string() + ": bad magic, not an RLAMAT1 file");
    const auto m = from_le<std::int64_t>(raw.data() + 8);
    const auto n = from_le<std::int64_t>(raw.data() + 16);
    if (m < 0 || n < 0)
        throw IoError(path.string() + ": negative dimensions in header");
    h.rows = static_cast<Index>(m);
    h.cols = static_cast<Index>(n);
    return h;
}

template <Scalar S>
void decode_rows(const char* p, Index count, Index cols, Mat<S>& out, Index row0, bool file_complex)
{
    const std::size_t per = file_complex ? 16 : 8;
    for (Index i = 0; i < count; ++i)
        for (Index j = 0; j < cols; ++j) {
            const char* q = p + (static_cast<std::size_t>(i * cols + j)) * per;
            const double re = from_le<double>(q);
            if constexpr (is_complex_v<S>) {
                const double im = file_complex ? from_le<double>(q + 8) : 0.0;
                out(row0 + i, j) = Complex(re, im);
            } else {
                out(row0 + i, j) = re;
            }
        }
}

std::ofstream open_out(const fs::path& path)
{
    if (path.has_parent_path() && !fs::exists(path.parent_path()))
        throw IoError(path.string() + ": directory does not exist");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw IoError(path.string() + ": cannot open for writing");
    return os;
}

void finish_out(std::ofstream& os, const fs::path& path)
{
    os.flush();
    if (!os)
        throw IoError(path.string() + ": write failed");
}

std::vector<std::vector<std::string>> read_csv_cells(const fs::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError(path.string() + ": cannot open");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            cell.erase(0, cell.find_first_not_of(" \t"));
            cell.erase(cell.find_last_not_of(" \t") + 1);
            cells.push_back(cell);
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

template <Scalar S>
nlohmann::json factor_entry(const fs::path& dir, const std::string& name, const Mat<S>& M, FileFormat fmt)
{
    const std::string file = name + extension_for(fmt);
    write_matrix<S>(dir / file, M, fmt);
    return {{"file", file}, {"rows", M.rows()}, {"cols", M.cols()}};
}

template <Scalar S>
nlohmann::json manifest_base(const std::string& kind, FileFormat fmt, const FactorMeta& meta)
{
    nlohmann::json j;
    j["kind"] = kind;
    j["format"] = to_string(fmt);
    j["scalar"] = is_complex_v<S> ? "complex" : "real";
    j["run"] = meta.fields;
    j["factors"] = nlohmann::json::object();
    return j;
}

void write_manifest(const fs::path& dir, const nlohmann::json& j)
{
    const fs::path p = dir / "manifest.json";
    std::ofstream os = open_out(p);
    os << j.dump(2) << '\n';
    finish_out(os, p);
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw IoError(dir.string() + ": cannot create output directory");
}

RealMat index_column(const std::vector<Index>& J)
{
    RealMat v(static_cast<Index>(J.size()), 1);
    for (std::size_t i = 0; i < J.size(); ++i)
        v(static_cast<Index>(i), 0) = static_cast<Real>(J[i]);
    return v;
}

} // namespace

std::string to_string(FileFormat f)
{
    switch (f) {
    case FileFormat::mm: return "mm";
    case FileFormat::binary: return "binary";
    case FileFormat::csv: return "csv";
    }
    return "unknown";
}

FileFormat parse_file_format(const std::string& name)
{
    const std::string s = lower(name);
    if (s == "mm" || s == "mtx" || s == "matrixmarket")
        return FileFormat::mm;
    if (s == "binary" || s == "bin")
        return FileFormat::binary;
    if (s == "csv")
        return FileFormat::csv;
    throw DomainError("unknown file format '" + name + "'");
}

FileFormat format_from_extension(const fs::path& path)
{
    const std::string ext = lower(path.extension().string());
    if (ext == ".mtx" || ext == ".mm")
        return FileFormat::mm;
    if (ext == ".bin")
        return FileFormat::binary;
    if (ext == ".csv")
        return FileFormat::csv;
    throw IoError(path.string() + ": unrecognised extension (expected .mtx, .bin or .csv)");
}

std::string extension_for(FileFormat f)
{
    switch (f) {
    case FileFormat::mm: return ".mtx";
    case FileFormat::binary: return ".bin";
    case FileFormat::csv: return ".csv";
    }
    return "";
}

// ---------------------------------------------------------------- Matrix Market

MatrixData read_matrix_market(const fs::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError(path.string() + ": cannot open");
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line))
        fail(path, 1, "empty file");
    ++lineno;
    const auto head = split_ws(line);
    if (head.size() != 5 || head[0] != "%%MatrixMarket" || lower(head[1]) != "matrix")
        fail(path, lineno, "malformed header, expected '%%MatrixMarket matrix <format> <field> <symmetry>'");
    const std::string layout = lower(head[2]);
    const std::string field = lower(head[3]);
    const std::string sym = lower(head[4]);
    if (layout != "array" && layout != "coordinate")
        fail(path, lineno, "unknown format '" + head[2] + "'");
    if (field != "real" && field != "complex" && field != "integer")
        fail(path, lineno, "unsupported field '" + head[3] + "'");
    if (sym != "general" && sym != "symmetric" && sym != "hermitian")
        fail(path, lineno, "unsupported symmetry '" + head[4] + "'");
    const bool cplx = field == "complex";
    if (sym == "hermitian" && !cplx)
        fail(path, lineno, "hermitian symmetry requires complex field");
    const bool mirror = sym != "general";
    const bool conj_mirror = sym == "hermitian";

    auto next_data_line = [&](std::vector<std::string>& toks) -> bool {
        while (std::getline(is, line)) {
            ++lineno;
            if (!line.empty() && line[0] == '%')
                continue;
            toks = split_ws(line);
            if (toks.empty())
                continue;
            return true;
        }
        return false;
    };

    std::vector<std::string> toks;
    if (!next_data_line(toks))
        fail(path, lineno, "missing size line");
    const bool coord = layout == "coordinate";
    if (toks.size() != (coord ? 3u : 2u))
        fail(path, lineno, "malformed size line");
    long long m = 0, n = 0, nnz = 0;
    auto parse_int = [&](const std::string& t, long long& v) {
        const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
        if (r.ec != std::errc() || r.ptr != t.data() + t.size() || v < 0)
            fail(path, lineno, "bad integer '" + t + "'");
    };
    parse_int(toks[0], m);
    parse_int(toks[1], n);
    if (coord)
        parse_int(toks[2], nnz);
    if (mirror && m != n)
        fail(path, lineno, "symmetric matrix must be square");

    CplxMat A = CplxMat::Zero(m, n);
    const std::size_t width = cplx ? 2 : 1;

    auto read_value = [&](const std::vector<std::string>& t, std::size_t at) {
        const double re = parse_entry(path, lineno, t[at]);
        const double im = cplx ? parse_entry(path, lineno, t[at + 1]) : 0.0;
        return Complex(re, im);
    };

    if (!coord) {
        for (long long j = 0; j < n; ++j)
            for (long long i = mirror ? j : 0; i < m; ++i) {
                if (!next_data_line(toks))
                    fail(path, lineno, "unexpected end of file in array data");
                if (toks.size() != width)
                    fail(path, lineno, "expected " + std::to_string(width) + " value(s) per entry");
                const Complex v = read_value(toks, 0);
                A(i, j) = v;
                if (mirror && i != j)
                    A(j, i) = conj_mirror ? std::conj(v) : v;
            }
    } else {
        std::map<std::pair<long long, long long>, bool> seen;
        for (long long e = 0; e < nnz; ++e) {
            if (!next_data_line(toks))
                fail(path, lineno, "unexpected end of file, " + std::to_string(nnz - e) + " entries missing");
            if (toks.size() != 2 + width)
                fail(path, lineno, "malformed coordinate entry");
            long long i = 0, j = 0;
            parse_int(toks[0], i);
            parse_int(toks[1], j);
            if (i < 1 || i > m || j < 1 || j > n)
                fail(path, lineno, "index (" + toks[0] + "," + toks[1] + ") out of bounds");
            --i;
            --j;
            const auto key = mirror ? std::make_pair(std::max(i, j), std::min(i, j)) : std::make_pair(i, j);
            if (!seen.emplace(key, true).second)
                fail(path, lineno, "duplicate entry (" + toks[0] + "," + toks[1] + ")");
            const Complex v = read_value(toks, 2);
            A(i, j) = v;
            if (mirror && i != j)
                A(j, i) = conj_mirror ? std::conj(v) : v;
        }
    }
    if (next_data_line(toks))
        fail(path, lineno, "trailing data after the declared entries");

    MatrixData out;
    out.is_complex = cplx;
    if (cplx)
        out.cplx = std::move(A);
    else
        out.real = A.real();
    return out;
}

template <Scalar S>
void write_matrix_market(const fs::path& path, const Mat<S>& A)
{
    std::ofstream os = open_out(path);
    os << "%%MatrixMarket matrix array " << (is_complex_v<S> ? "complex" : "real") << " general\n";
    os << A.rows() << ' ' << A.cols() << '\n';
    for (Index j = 0; j < A.cols(); ++j)
        for (Index i = 0; i < A.rows(); ++i) {
            if constexpr (is_complex_v<S>)
                os << format_double(A(i, j).real()) << ' ' << format_double(A(i, j).imag()) << '\n';
            else
                os << format_double(A(i, j)) << '\n';
        }
    finish_out(os, path);
}

// ---------------------------------------------------------------- binary

MatrixData read_binary(const fs::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError(path.string() + ": cannot open");
    const BinaryHeader h = read_binary_header(is, path);
    const std::size_t per = h.is_complex ? 16 : 8;
    const auto bytes = static_cast<std::size_t>(h.rows * h.cols) * per;
    std::vector<char> buf(bytes);
    is.read(buf.data(), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(is.gcount()) != bytes)
        throw IoError(path.string() + ": truncated data (" + std::to_string(is.gcount()) + " of " +
                      std::to_string(bytes) + " bytes)");
    MatrixData out;
    out.is_complex = h.is_complex;
    if (h.is_complex) {
        out.cplx.resize(h.rows, h.cols);
        decode_rows<Complex>(buf.data(), h.rows, h.cols, out.cplx, 0, true);
        if (!out.cplx.allFinite())
            throw IoError(path.string() + ": non-finite entry");
    } else {
        out.real.resize(h.rows, h.cols);
        decode_rows<Real>(buf.data(), h.rows, h.cols, out.real, 0, false);
        if (!out.real.allFinite())
            throw IoError(path.string() + ": non-finite entry");
    }
    return out;
}

template <Scalar S>
void write_binary(const fs::path& path, const Mat<S>& A)
{
    std::ofstream os = open_out(path);
    const auto& magic = is_complex_v<S> ? kMagicCplx : kMagicReal;
    os.write(magic.data(), 8);
    put_le<std::int64_t>(os, static_cast<std::int64_t>(A.rows()));
    put_le<std::int64_t>(os, static_cast<std::int64_t>(A.cols()));
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j) {
            if constexpr (is_complex_v<S>) {
                put_le<double>(os, A(i, j).real());
                put_le<double>(os, A(i, j).imag());
            } else {
                put_le<double>(os, A(i, j));
            }
        }
    finish_out(os, path);
}

// ---------------------------------------------------------------- CSV

MatrixData read_csv(const fs::path& path)
{
    const auto cells = read_csv_cells(path);
    const Index m = static_cast<Index>(cells.size());
    const Index n = m > 0 ? static_cast<Index>(cells.front().size()) : 0;
    CplxMat A(m, n);
    bool cplx = false;
    for (Index i = 0; i < m; ++i) {
        const auto& row = cells[static_cast<std::size_t>(i)];
        if (static_cast<Index>(row.size()) != n)
            fail(path, static_cast<std::size_t>(i + 1), "ragged row");
        for (Index j = 0; j < n; ++j) {
            const std::string& c = row[static_cast<std::size_t>(j)];
            Complex z;
            if (!parse_complex(c, z))
                fail(path, static_cast<std::size_t>(i + 1), "cannot parse cell '" + c + "'");
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                fail(path, static_cast<std::size_t>(i + 1), "non-finite entry");
            cplx = cplx || (!c.empty() && c.back() == 'i');
            A(i, j) = z;
        }
    }
    MatrixData out;
    out.is_complex = cplx;
    if (cplx)
        out.cplx = std::move(A);
    else
        out.real = A.real();
    return out;
}

template <Scalar S>
void write_csv(const fs::path& path, const Mat<S>& A)
{
    std::ofstream os = open_out(path);
    for (Index i = 0; i < A.rows(); ++i) {
        for (Index j = 0; j < A.cols(); ++j) {
            if (j > 0)
                os << ',';
            if constexpr (is_complex_v<S>)
                os << format_complex(A(i, j));
            else
                os << format_double(A(i, j));
        }
        os << '\n';
    }
    finish_out(os, path);
}

MatrixData read_matrix(const fs::path& path)
{
    if (!fs::exists(path))
        throw IoError(path.string() + ": no such file");
    switch (format_from_extension(path)) {
    case FileFormat::mm: return read_matrix_market(path);
    case FileFormat::binary: return read_binary(path);
    case FileFormat::csv: return read_csv(path);
    }
    throw IoError(path.string() + ": unknown format");
}

template <Scalar S>
void write_matrix(const fs::path& path, const Mat<S>& A, FileFormat f)
{
    switch (f) {
    case FileFormat::mm: write_matrix_market<S>(path, A); return;
    case FileFormat::binary: write_binary<S>(path, A); return;
    case FileFormat::csv: write_csv<S>(path, A); return;
    }
}

// ---------------------------------------------------------------- factors

template <Scalar S>
nlohmann::json write_factors(const PartialSVD<S>& f, const fs::path& dir, FileFormat fmt, const FactorMeta& meta)
{
    ensure_dir(dir);
    nlohmann::json j = manifest_base<S>("svd", fmt, meta);
    j["factors"]["U"] = factor_entry<S>(dir, "U", f.U, fmt);
    j["factors"]["sigma"] = factor_entry<Real>(dir, "sigma", RealMat(f.sigma), fmt);
    j["factors"]["V"] = factor_entry<S>(dir, "V", f.V, fmt);
    write_manifest(dir, j);
    return j;
}

template <Scalar S>
nlohmann::json write_factors(const PartialEig<S>& f, const fs::path& dir, FileFormat fmt, const FactorMeta& meta)
{
    ensure_dir(dir);
    nlohmann::json j = manifest_base<S>("eig", fmt, meta);
    j["factors"]["U"] = factor_entry<S>(dir, "U", f.U, fmt);
    j["factors"]["lambda"] = factor_entry<Real>(dir, "lambda", RealMat(f.lambda), fmt);
    write_manifest(dir, j);
    return j;
}

template <Scalar S>
nlohmann::json write_factors(const InterpolativeDecomp<S>& f, const fs::path& dir, FileFormat fmt,
                             const FactorMeta& meta)
{
    ensure_dir(dir);
    nlohmann::json j = manifest_base<S>("id", fmt, meta);
    j["side"] = f.side == IdSide::row ? "row" : "column";
    j["index_base"] = 0;
    j["swaps"] = f.swaps;
    j["factors"]["J"] = factor_entry<Real>(dir, "J", index_column(f.J), fmt);
    j["factors"]["X"] = factor_entry<S>(dir, "X", f.X, fmt);
    write_manifest(dir, j);
    return j;
}

template <Scalar S>
nlohmann::json write_factors(const NystromFactors<S>& f, const fs::path& dir, FileFormat fmt,
                             const FactorMeta& meta)
{
    ensure_dir(dir);
    nlohmann::json j = manifest_base<S>("nystrom", fmt, meta);
    j["factors"]["F"] = factor_entry<S>(dir, "F", f.F, fmt);
    write_manifest(dir, j);
    return j;
}

template <Scalar S>
nlohmann::json write_factors(const PartialQR<S>& f, const fs::path& dir, FileFormat fmt, const FactorMeta& meta)
{
    ensure_dir(dir);
    nlohmann::json j = manifest_base<S>("qr", fmt, meta);
    j["factors"]["Q"] = factor_entry<S>(dir, "Q", f.Q, fmt);
    j["factors"]["R"] = factor_entry<S>(dir, "R", f.R, fmt);
    write_manifest(dir, j);
    return j;
}

nlohmann::json read_manifest(const fs::path& dir)
{
    const fs::path p = dir / "manifest.json";
    std::ifstream is(p);
    if (!is)
        throw IoError(p.string() + ": cannot open");
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(p.string() + ": " + e.what());
    }
}

MatrixData read_factor(const fs::path& dir, const std::string& name)
{
    const nlohmann::json j = read_manifest(dir);
    if (!j.contains("factors") || !j["factors"].contains(name))
        throw IoError((dir / "manifest.json").string() + ": no factor named '" + name + "'");
    return read_matrix(dir / j["factors"][name]["file"].get<std::string>());
}

// ---------------------------------------------------------------- streaming

namespace {

template <Scalar S>
class BinarySource final : public RowBlockStream<S>::Source
{
public:
    explicit BinarySource(const fs::path& path) : path_(path), is_(path, std::ios::binary)
    {
        if (!is_)
            throw IoError(path.string() + ": cannot open");
        h_ = read_binary_header(is_, path);
        if (h_.is_complex && !is_complex_v<S>)
            throw IoError(path.string() + ": complex data cannot be streamed as real");
    }
    Index rows() const override { return h_.rows; }
    Index cols() const override { return h_.cols; }
    Mat<S> read(Index first, Index count, Index block_index) override
    {
        const std::size_t per = h_.is_complex ? 16 : 8;
        const auto bytes = static_cast<std::size_t>(count * h_.cols) * per;
        buf_.resize(bytes);
        is_.clear();
        is_.seekg(kHeaderBytes + static_cast<std::streamoff>(static_cast<std::size_t>(first * h_.cols) * per));
        is_.read(buf_.data(), static_cast<std::streamsize>(bytes));
        if (static_cast<std::size_t>(is_.gcount()) != bytes)
            throw IoError(path_.string() + ": truncated file at block " + std::to_string(block_index) + " (rows " +
                          std::to_string(first) + ".." + std::to_string(first + count - 1) + ")");
        Mat<S> out(count, h_.cols);
        decode_rows<S>(buf_.data(), count, h_.cols, out, 0, h_.is_complex);
        if (!out.allFinite())
            throw IoError(path_.string() + ": non-finite entry in block " + std::to_string(block_index));
        return out;
    }

private:
    fs::path path_;
    std::ifstream is_;
    BinaryHeader h_;
    std::vector<char> buf_;
};

template <Scalar S>
class CsvSource final : public RowBlockStream<S>::Source
{
public:
    explicit CsvSource(const fs::path& path) : path_(path), is_(path)
    {
        if (!is_)
            throw IoError(path.string() + ": cannot open");
        // Count rows and fix the width from the first row.
        std::ifstream probe(path);
        std::string line;
        while (std::getline(probe, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            if (m_ == 0)
                n_ = static_cast<Index>(std::count(line.begin(), line.end(), ',')) + 1;
            ++m_;
        }
    }
    Index rows() const override { return m_; }
    Index cols() const override { return n_; }
    Mat<S> read(Index first, Index count, Index block_index) override
    {
        (void)first;
        Mat<S> out(count, n_);
        std::string line;
        for (Index i = 0; i < count; ++i) {
            do {
                if (!std::getline(is_, line))
                    throw IoError(path_.string() + ": truncated file at block " + std::to_string(block_index));
                if (!line.empty() && line.back() == '\r')
                    line.pop_back();
            } while (line.find_first_not_of(" \t") == std::string::npos);
            std::istringstream ls(line);
            std::string cell;
            Index j = 0;
            while (std::getline(ls, cell, ',')) {
                cell.erase(0, cell.find_first_not_of(" \t"));
                cell.erase(cell.find_last_not_of(" \t") + 1);
                Complex z;
                if (j >= n_ || !parse_complex(cell, z) || !std::isfinite(z.real()) || !std::isfinite(z.imag()))
                    throw IoError(path_.string() + ": bad cell in block " + std::to_string(block_index));
                if constexpr (is_complex_v<S>) {
                    out(i, j) = z;
                } else {
                    if (z.imag() != 0.0)
                        throw IoError(path_.string() + ": complex data cannot be streamed as real");
                    out(i, j) = z.real();
                }
                ++j;
            }
            if (j != n_)
                throw IoError(path_.string() + ": ragged row in block " + std::to_string(block_index));
        }
        return out;
    }

private:
    fs::path path_;
    std::ifstream is_;
    Index m_ = 0;
    Index n_ = 0;
};

template <Scalar S>
class MemorySource final : public RowBlockStream<S>::Source
{
public:
    explicit MemorySource(const Mat<S>& A) : A_(&A) {}
    Index rows() const override { return A_->rows(); }
    Index cols() const override { return A_->cols(); }
    Mat<S> read(Index first, Index count, Index) override { return A_->middleRows(first, count); }

private:
    const Mat<S>* A_;
};

} // namespace

template <Scalar S>
RowBlockStream<S>::RowBlockStream(std::unique_ptr<Source> src, Index block_rows)
    : src_(std::move(src)), block_rows_(block_rows)
{
    if (block_rows < 1)
        throw DomainError("row block size must be >= 1");
}

template <Scalar S>
std::optional<Mat<S>> RowBlockStream<S>::next()
{
    if (done())
        return std::nullopt;
    const Index count = std::min(block_rows_, rows() - cursor_);
    Mat<S> block = src_->read(cursor_, count, block_index_);
    cursor_ += count;
    ++block_index_;
    return block;
}

template <Scalar S>
RowBlockStream<S> stream_row_blocks(const fs::path& path, Index block_rows)
{
    switch (format_from_extension(path)) {
    case FileFormat::binary: return RowBlockStream<S>(std::make_unique<BinarySource<S>>(path), block_rows);
    case FileFormat::csv: return RowBlockStream<S>(std::make_unique<CsvSource<S>>(path), block_rows);
    case FileFormat::mm: break;
    }
    throw IoError(path.string() + ": Matrix Market arrays are column-major and cannot be row-streamed");
}

template <Scalar S>
RowBlockStream<S> stream_memory(const Mat<S>& A, Index block_rows)
{
    return RowBlockStream<S>(std::make_unique<MemorySource<S>>(A), block_rows);
}

template <Scalar S>
SinglePassSketcher<S>::SinglePassSketcher(Index m, Index n, Index ell, Index ell_tilde, std::uint64_t seed)
    : m_(m), n_(n)
{
    if (ell < 1 || ell > n)
        throw DomainError("single-pass sketch: need 1 <= ell <= n");
    if (ell_tilde < 0 || ell_tilde > m)
        throw DomainError("single-pass sketch: need 0 <= ell_tilde <= m");
    bundle_.Omega = to_field<S>(gaussian_matrix(n, ell, derive_seed(seed, 1)));
    bundle_.Y = Mat<S>::Zero(m, ell);
    if (ell_tilde > 0) {
        bundle_.Omega_tilde = to_field<S>(gaussian_matrix(m, ell_tilde, derive_seed(seed, 2)));
        bundle_.Y_tilde = Mat<S>::Zero(n, ell_tilde);
    }
}

template <Scalar S>
void SinglePassSketcher<S>::consume(const Mat<S>& block)
{
    if (block.cols() != n_)
        throw DomainError("single-pass sketch: block has the wrong column count");
    if (cursor_ + block.rows() > m_)
        throw DomainError("single-pass sketch: more rows than declared");
    bundle_.Y.middleRows(cursor_, block.rows()).noalias() = block * bundle_.Omega;
    if (bundle_.Y_tilde)
        bundle_.Y_tilde->noalias() += block.adjoint() * bundle_.Omega_tilde->middleRows(cursor_, block.rows());
    cursor_ += block.rows();
}

template <Scalar S>
SampleBundle<S> SinglePassSketcher<S>::finish()
{
    if (cursor_ != m_)
        throw IoError("single-pass sketch: stream ended after " + std::to_string(cursor_) + " of " +
                      std::to_string(m_) + " rows");
    finalize_bundle(bundle_);
    return bundle_;
}

template <Scalar S>
SampleBundle<S> sketch_stream(RowBlockStream<S>& stream, Index ell, Index ell_tilde, std::uint64_t seed)
{
    SinglePassSketcher<S> sk(stream.rows(), stream.cols(), ell, ell_tilde, seed);
    while (auto block = stream.next())
        sk.consume(*block);
    return sk.finish();
}

#define RLA_INSTANTIATE(S)                                                                                   \
    template void write_matrix_market<S>(const fs::path&, const Mat<S>&);                                    \
    template void write_binary<S>(const fs::path&, const Mat<S>&);                                           \
    template void write_csv<S>(const fs::path&, const Mat<S>&);                                              \
    template void write_matrix<S>(const fs::path&, const Mat<S>&, FileFormat);                               \
    template nlohmann::json write_factors<S>(const PartialSVD<S>&, const fs::path&, FileFormat,              \
                                             const FactorMeta&);                                             \
    template nlohmann::json write_factors<S>(const PartialEig<S>&, const fs::path&, FileFormat,              \
                                             const FactorMeta&);                                             \
    template nlohmann::json write_factors<S>(const InterpolativeDecomp<S>&, const fs::path&, FileFormat,     \
                                             const FactorMeta&);                                             \
    template nlohmann::json write_factors<S>(const NystromFactors<S>&, const fs::path&, FileFormat,          \
                                             const FactorMeta&);                                             \
    template nlohmann::json write_factors<S>(const PartialQR<S>&, const fs::path&, FileFormat,               \
                                             const FactorMeta&);                                             \
    template class RowBlockStream<S>;                                                                        \
    template RowBlockStream<S> stream_row_blocks<S>(const fs::path&, Index);                                 \
    template RowBlockStream<S> stream_memory<S>(const Mat<S>&, Index);                                       \
    template class SinglePassSketcher<S>;                                                                    \
    template SampleBundle<S> sketch_stream<S>(RowBlockStream<S>&, Index, Index, std::uint64_t);

RLA_INSTANTIATE(Real)
RLA_INSTANTIATE(Complex)

#undef RLA_INSTANTIATE

} // namespace rla
