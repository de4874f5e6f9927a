#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "rla/error.hpp"
#include "rla/io.hpp"
#include "rla/random.hpp"

using namespace rla;

namespace {

class TempDir
{
public:
    TempDir()
    {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("rla-io-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    fs::path operator/(const std::string& name) const { return path_ / name; }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream os(p);
    os << text;
}

std::string io_message(const fs::path& p)
{
    try {
        (void)read_matrix(p);
    } catch (const IoError& e) {
        return e.what();
    }
    return "";
}

CplxMat complex_gaussian(Index m, Index n, std::uint64_t seed)
{
    CplxMat A(m, n);
    A.real() = gaussian_matrix(m, n, derive_seed(seed, 1));
    A.imag() = gaussian_matrix(m, n, derive_seed(seed, 2));
    return A;
}

} // namespace

// ---------------------------------------------------------------- Matrix Market

TEST(MatrixMarket, ArrayIsColumnMajor)
{
    TempDir d;
    write_text(d / "a.mtx", "%%MatrixMarket matrix array real general\n% comment\n2 2\n1\n2\n3\n4\n");
    const MatrixData m = read_matrix(d / "a.mtx");
    ASSERT_FALSE(m.is_complex);
    RealMat expected(2, 2);
    expected << 1, 3, 2, 4;
    EXPECT_EQ(m.real, expected);
}

TEST(MatrixMarket, CoordinateSymmetricIsMirrored)
{
    TempDir d;
    write_text(d / "s.mtx", "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1.5\n2 1 5\n");
    const MatrixData m = read_matrix(d / "s.mtx");
    EXPECT_EQ(m.real(0, 1), 5.0);
    EXPECT_EQ(m.real(1, 0), 5.0);
    EXPECT_EQ(m.real(0, 0), 1.5);
    EXPECT_EQ(m.real(1, 1), 0.0);
}

TEST(MatrixMarket, ComplexHermitianCoordinate)
{
    TempDir d;
    write_text(d / "h.mtx", "%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 2 0\n2 1 1 3\n");
    const MatrixData m = read_matrix(d / "h.mtx");
    ASSERT_TRUE(m.is_complex);
    EXPECT_EQ(m.cplx(1, 0), Complex(1, 3));
    EXPECT_EQ(m.cplx(0, 1), Complex(1, -3));
}

TEST(MatrixMarket, IntegerField)
{
    TempDir d;
    write_text(d / "i.mtx", "%%MatrixMarket matrix coordinate integer general\n2 3 1\n2 3 7\n");
    const MatrixData m = read_matrix(d / "i.mtx");
    EXPECT_EQ(m.real(1, 2), 7.0);
    EXPECT_EQ(m.real.sum(), 7.0);
}

TEST(MatrixMarket, HeaderTypoNamesTheLine)
{
    TempDir d;
    write_text(d / "bad.mtx", "%%MatrixMarket matrix arary real general\n1 1\n1\n");
    EXPECT_NE(io_message(d / "bad.mtx").find("line 1"), std::string::npos);
}

TEST(MatrixMarket, Errors)
{
    TempDir d;
    write_text(d / "dup.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 1 2\n");
    EXPECT_NE(io_message(d / "dup.mtx").find("line 4"), std::string::npos);
    write_text(d / "oob.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n");
    EXPECT_NE(io_message(d / "oob.mtx").find("line 3"), std::string::npos);
    write_text(d / "nan.mtx", "%%MatrixMarket matrix array real general\n1 2\n1\nnan\n");
    EXPECT_NE(io_message(d / "nan.mtx").find("line 4"), std::string::npos);
    write_text(d / "short.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n");
    EXPECT_FALSE(io_message(d / "short.mtx").empty());
    // mirrored duplicate in symmetric storage
    write_text(d / "symdup.mtx", "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1\n1 2 1\n");
    EXPECT_FALSE(io_message(d / "symdup.mtx").empty());
    EXPECT_THROW(read_matrix(d / "missing.mtx"), IoError);
}

TEST(MatrixMarket, WriteReadRoundTrip)
{
    TempDir d;
    const RealMat A = gaussian_matrix(5, 3, 1);
    write_matrix_market<Real>(d / "r.mtx", A);
    EXPECT_EQ(read_matrix(d / "r.mtx").real, A);
    const CplxMat C = complex_gaussian(3, 4, 2);
    write_matrix_market<Complex>(d / "c.mtx", C);
    EXPECT_EQ(read_matrix(d / "c.mtx").cplx, C);
}

// ---------------------------------------------------------------- binary and CSV

TEST(Binary, BitwiseRoundTrip)
{
    TempDir d;
    const RealMat A = gaussian_matrix(7, 4, 3);
    write_binary<Real>(d / "a.bin", A);
    EXPECT_EQ(read_binary(d / "a.bin").real, A);
    EXPECT_EQ(fs::file_size(d / "a.bin"), 24u + 7u * 4u * 8u);
    const CplxMat C = complex_gaussian(3, 5, 4);
    write_binary<Complex>(d / "c.bin", C);
    const MatrixData m = read_matrix(d / "c.bin");
    ASSERT_TRUE(m.is_complex);
    EXPECT_EQ(m.cplx, C);
}

TEST(Binary, LayoutIsRowMajorLittleEndian)
{
    TempDir d;
    RealMat A(2, 2);
    A << 1, 2, 3, 4;
    write_binary<Real>(d / "a.bin", A);
    std::ifstream is(d / "a.bin", std::ios::binary);
    char magic[8];
    is.read(magic, 8);
    EXPECT_EQ(std::string(magic, 8), "RLAMAT1R");
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    EXPECT_EQ(buf[0], 2);
    is.seekg(24 + 8);
    double second = 0;
    is.read(reinterpret_cast<char*>(&second), 8);
    EXPECT_EQ(second, 2.0);
}

TEST(Binary, TruncatedAndBadMagic)
{
    TempDir d;
    write_binary<Real>(d / "a.bin", RealMat(gaussian_matrix(4, 4, 1)));
    fs::resize_file(d / "a.bin", 24 + 8 * 10);
    EXPECT_THROW(read_matrix(d / "a.bin"), IoError);
    write_text(d / "b.bin", "NOTAMATRIX0000000000000000000");
    EXPECT_NE(io_message(d / "b.bin").find("magic"), std::string::npos);
}

TEST(Csv, RoundTrip)
{
    TempDir d;
    const RealMat A = gaussian_matrix(4, 3, 5);
    write_csv<Real>(d / "a.csv", A);
    EXPECT_EQ(read_matrix(d / "a.csv").real, A);
    const CplxMat C = complex_gaussian(2, 3, 6);
    write_csv<Complex>(d / "c.csv", C);
    EXPECT_EQ(read_matrix(d / "c.csv").cplx, C);
}

TEST(Csv, ParsesComplexCells)
{
    TempDir d;
    write_text(d / "c.csv", "1+2i,3-1e-3i\n-4,5i\n");
    const MatrixData m = read_matrix(d / "c.csv");
    ASSERT_TRUE(m.is_complex);
    EXPECT_EQ(m.cplx(0, 0), Complex(1, 2));
    EXPECT_EQ(m.cplx(0, 1), Complex(3, -1e-3));
    EXPECT_EQ(m.cplx(1, 0), Complex(-4, 0));
    EXPECT_EQ(m.cplx(1, 1), Complex(0, 5));
}

TEST(Csv, RaggedRowsAreRejected)
{
    TempDir d;
    write_text(d / "r.csv", "1,2\n3\n");
    EXPECT_THROW(read_matrix(d / "r.csv"), IoError);
}

TEST(Formats, NamesAndExtensions)
{
    for (FileFormat f : {FileFormat::mm, FileFormat::binary, FileFormat::csv}) {
        EXPECT_EQ(parse_file_format(to_string(f)), f);
        EXPECT_EQ(format_from_extension("x" + extension_for(f)), f);
    }
    EXPECT_THROW(parse_file_format("hdf5"), DomainError);
    EXPECT_THROW(format_from_extension("x.txt"), IoError);
}

// ---------------------------------------------------------------- factors and manifest

TEST(WriteFactors, SvdBinaryRoundTripIsBitwise)
{
    TempDir d;
    PartialSVD<Real> f{gaussian_matrix(6, 3, 1), RealVec(3), gaussian_matrix(5, 3, 2)};
    f.sigma << 3.0, 2.0, 1.0 / 3.0;
    FactorMeta meta;
    meta.fields["seed"] = std::uint64_t(18446744073709551557ULL);
    meta.fields["passes"] = 2;
    meta.fields["est_error"] = 1.25e-11;
    const fs::path out = d / "svd";
    write_factors<Real>(f, out, FileFormat::binary, meta);
    EXPECT_EQ(read_factor(out, "U").real, f.U);
    EXPECT_EQ(read_factor(out, "V").real, f.V);
    EXPECT_EQ(RealVec(read_factor(out, "sigma").real.col(0)), f.sigma);
    const auto j = read_manifest(out);
    EXPECT_EQ(j["kind"], "svd");
    EXPECT_EQ(j["run"]["seed"].get<std::uint64_t>(), 18446744073709551557ULL);
    EXPECT_EQ(j["run"]["passes"], 2);
    EXPECT_EQ(j["factors"]["U"]["rows"], 6);
    EXPECT_EQ(j["factors"]["U"]["cols"], 3);
}

TEST(WriteFactors, CsvSigmaIsOnePerLineDescending)
{
    TempDir d;
    PartialSVD<Real> f{RealMat::Identity(3, 3), RealVec(3), RealMat::Identity(3, 3)};
    f.sigma << 5.0, 2.5, 0.125;
    write_factors<Real>(f, d / "out", FileFormat::csv, FactorMeta{});
    const std::string file = read_manifest(d / "out")["factors"]["sigma"]["file"];
    std::ifstream is(d.path() / "out" / file);
    std::string line;
    std::vector<double> vals;
    while (std::getline(is, line))
        vals.push_back(std::stod(line));
    ASSERT_EQ(vals.size(), 3u);
    EXPECT_EQ(vals[0], 5.0);
    EXPECT_EQ(vals[1], 2.5);
    EXPECT_EQ(vals[2], 0.125);
}

TEST(WriteFactors, EveryKindAndFormat)
{
    TempDir d;
    const RealMat U = gaussian_matrix(4, 2, 1);
    PartialEig<Real> e{U, RealVec(2)};
    e.lambda << 2.0, -1.0;
    InterpolativeDecomp<Real> id;
    id.J = {3, 0};
    id.X = gaussian_matrix(2, 5, 3);
    id.side = IdSide::column;
    NystromFactors<Real> ny{U};
    PartialQR<Complex> qr{complex_gaussian(4, 2, 4), complex_gaussian(2, 6, 5)};
    int i = 0;
    for (FileFormat fmt : {FileFormat::mm, FileFormat::binary, FileFormat::csv}) {
        const std::string tag = std::to_string(i++);
        write_factors<Real>(e, d / ("eig" + tag), fmt, FactorMeta{});
        EXPECT_LE((read_factor(d / ("eig" + tag), "U").real - U).norm(), 1e-15);
        EXPECT_EQ(read_factor(d / ("eig" + tag), "lambda").real(1, 0), -1.0);

        write_factors<Real>(id, d / ("id" + tag), fmt, FactorMeta{});
        const auto j = read_manifest(d / ("id" + tag));
        EXPECT_EQ(j["kind"], "id");
        EXPECT_EQ(j["side"], "column");
        EXPECT_EQ(j["index_base"], 0);
        const RealMat J = read_factor(d / ("id" + tag), "J").real;
        EXPECT_EQ(J(0, 0), 3.0);
        EXPECT_EQ(J(1, 0), 0.0);

        write_factors<Real>(ny, d / ("ny" + tag), fmt, FactorMeta{});
        EXPECT_EQ(read_manifest(d / ("ny" + tag))["kind"], "nystrom");

        write_factors<Complex>(qr, d / ("qr" + tag), fmt, FactorMeta{});
        const MatrixData R = read_factor(d / ("qr" + tag), "R");
        ASSERT_TRUE(R.is_complex);
        EXPECT_LE((R.cplx - qr.R).norm(), 1e-15);
    }
}

TEST(WriteFactors, UnwritablePath)
{
    PartialEig<Real> e{RealMat::Identity(2, 2), RealVec::Ones(2)};
    EXPECT_THROW(write_factors<Real>(e, "/proc/rla-cannot-write/here", FileFormat::binary, FactorMeta{}), IoError);
    EXPECT_THROW(read_manifest("/nonexistent-rla-dir"), IoError);
}

// ---------------------------------------------------------------- streaming

TEST(RowBlocks, SingleBlockEqualsTheMatrix)
{
    const RealMat A = gaussian_matrix(10, 4, 1);
    auto s = stream_memory<Real>(A, 10);
    const auto b = s.next();
    ASSERT_TRUE(b.has_value());
    EXPECT_EQ(*b, A);
    EXPECT_FALSE(s.next().has_value());
}

TEST(RowBlocks, RowsAreDeliveredOnceInOrder)
{
    TempDir d;
    const RealMat A = gaussian_matrix(23, 5, 2);
    write_binary<Real>(d / "a.bin", A);
    write_csv<Real>(d / "a.csv", A);
    for (const char* name : {"a.bin", "a.csv"})
        for (Index br : {1, 4, 7, 23, 100}) {
            auto s = stream_row_blocks<Real>(d / name, br);
            Index total = 0;
            RealMat back(0, 5);
            while (auto b = s.next()) {
                EXPECT_LE(b->rows(), br);
                back.conservativeResize(back.rows() + b->rows(), Eigen::NoChange);
                back.bottomRows(b->rows()) = *b;
                total += b->rows();
            }
            EXPECT_EQ(total, 23);
            EXPECT_EQ(back, A);
            EXPECT_TRUE(s.done());
        }
}

TEST(RowBlocks, TruncatedFileFailsAtTheBlock)
{
    TempDir d;
    write_binary<Real>(d / "a.bin", RealMat(gaussian_matrix(20, 3, 1)));
    fs::resize_file(d / "a.bin", 24 + 8 * 3 * 13);
    auto s = stream_row_blocks<Real>(d / "a.bin", 5);
    ASSERT_TRUE(s.next().has_value());
    ASSERT_TRUE(s.next().has_value());
    try {
        (void)s.next();
        FAIL() << "expected a stream error";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("block 2"), std::string::npos) << e.what();
    }
}

TEST(RowBlocks, MatrixMarketIsNotStreamable)
{
    TempDir d;
    write_matrix_market<Real>(d / "a.mtx", RealMat(RealMat::Ones(2, 2)));
    EXPECT_THROW(stream_row_blocks<Real>(d / "a.mtx", 1), IoError);
    EXPECT_THROW(stream_memory<Real>(RealMat::Ones(2, 2), 0), DomainError);
}

TEST(SinglePass, StreamedBundleMatchesTheInMemoryBundle)
{
    TempDir d;
    const RealMat A = gaussian_matrix(64, 32, 7);
    write_binary<Real>(d / "a.bin", A);
    auto s = stream_row_blocks<Real>(d / "a.bin", 16);
    const auto streamed = sketch_stream<Real>(s, 8, 10, 99);
    const DenseOperator<Real> op(A);
    const auto mem = make_bundle_general<Real>(op, 8, 10, 99);
    EXPECT_EQ(streamed.Omega, mem.Omega);
    EXPECT_EQ(*streamed.Omega_tilde, *mem.Omega_tilde);
    EXPECT_LE((streamed.Y - mem.Y).norm(), 1e-14 * mem.Y.norm());
    EXPECT_LE((*streamed.Y_tilde - *mem.Y_tilde).norm(), 1e-14 * mem.Y_tilde->norm());
}

TEST(SinglePass, FileAndMemoryStreamsAgreeBitwise)
{
    TempDir d;
    const RealMat A = gaussian_matrix(40, 12, 3);
    write_binary<Real>(d / "a.bin", A);
    auto fs_stream = stream_row_blocks<Real>(d / "a.bin", 9);
    auto mem_stream = stream_memory<Real>(A, 9);
    const auto a = sketch_stream<Real>(fs_stream, 5, 5, 1);
    const auto b = sketch_stream<Real>(mem_stream, 5, 5, 1);
    EXPECT_EQ(a.Y, b.Y);
    EXPECT_EQ(*a.Y_tilde, *b.Y_tilde);
    EXPECT_EQ(a.Q, b.Q);
}

TEST(SinglePass, IncompleteStreamIsAnError)
{
    SinglePassSketcher<Real> sk(10, 4, 2, 0, 1);
    sk.consume(RealMat::Ones(6, 4));
    EXPECT_EQ(sk.rows_seen(), 6);
    EXPECT_THROW(sk.finish(), IoError);
    SinglePassSketcher<Real> sk2(10, 4, 2, 0, 1);
    EXPECT_THROW(sk2.consume(RealMat::Ones(11, 4)), DomainError);
    EXPECT_THROW(SinglePassSketcher<Real>(10, 4, 5, 0, 1), DomainError);
}
