#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(RABI_DARBOUX_CLI) + " " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return {-1, {}};
    std::string out;
    std::array<char, 4096> buf;
    for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0;) out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("rd_cli_" + std::to_string(::getpid()) + "_" +
                                           ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    fs::path dir;
};

} // namespace

TEST_F(Cli, RabiWritesCsvToStdout) {
    const auto r = run("rabi --f0 0 --xi 1 --t1 1 --n 3");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "t,P");
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
    EXPECT_EQ(r.out.find('\r'), std::string::npos);
}

TEST_F(Cli, ValidationErrorsExitOne) {
    EXPECT_EQ(run("rabi --xi 1 --omega0 2").code, 1);
    EXPECT_EQ(run("rabi").code, 1);
    EXPECT_EQ(run("rabi --omega0 0.5").code, 1);
    EXPECT_EQ(run("figure fig9 --out " + dir.string()).code, 1);
    EXPECT_EQ(run("transform --omega0 2 --varpi 1.5").code, 1);
    EXPECT_EQ(run("simulate --drive nonsense --xi 1").code, 1);
    EXPECT_EQ(run("sweep --varpi-list 0.2 --a-list x --omega0-list 2").code, 1);
    EXPECT_EQ(run("").code, 1);
}

TEST_F(Cli, NumericFailuresExitTwo) {
    std::ofstream(dir / "spike.csv") << "0,0\n0.5,0\n0.50000000000001,1e18\n1,1e18\n";
    EXPECT_EQ(run("simulate --drive tabulated --table " + (dir / "spike.csv").string() + " --xi 1 --t1 1 --n 11").code, 2);
    EXPECT_EQ(run("verify --inject-fault --seed-count 5").code, 2);
}

TEST_F(Cli, IoFailuresExitThree) {
    EXPECT_EQ(run("rabi --xi 1 --out /nonexistent-dir/p.csv").code, 3);
    EXPECT_EQ(run("--config /nonexistent-dir/run.ini rabi --xi 1").code, 3);
    EXPECT_EQ(run("simulate --drive tabulated --table /nonexistent-dir/t.csv --xi 1").code, 3);
}

TEST_F(Cli, VerifyPasses) {
    const auto r = run("verify --seed-count 20 --jobs 2");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
}

TEST_F(Cli, FigureIsByteIdenticalAcrossRuns) {
    const auto a = dir / "a", b = dir / "b";
    const auto ra = run("figure fig1a --out " + a.string());
    const auto rb = run("figure fig1a --out " + b.string());
    ASSERT_EQ(ra.code, 0);
    ASSERT_EQ(rb.code, 0);
    for (const char* name : {"fig1a_varpi_1_4.csv", "fig1a_varpi_1_6.csv"}) {
        const auto x = slurp(a / name);
        EXPECT_FALSE(x.empty());
        EXPECT_EQ(x, slurp(b / name)) << name;
        EXPECT_EQ(x.substr(0, x.find('\n')), "t,P1,f1");
    }
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
    std::ofstream(dir / "run.ini") << "f0=0\nxi=1\nt1=2\nn=5\n";
    const auto from_file = run("--config " + (dir / "run.ini").string() + " rabi");
    ASSERT_EQ(from_file.code, 0);
    EXPECT_EQ(std::count(from_file.out.begin(), from_file.out.end(), '\n'), 6);
    const auto overridden = run("--config " + (dir / "run.ini").string() + " rabi --n 3");
    ASSERT_EQ(overridden.code, 0);
    EXPECT_EQ(std::count(overridden.out.begin(), overridden.out.end(), '\n'), 4);
}

TEST_F(Cli, SweepAndDetuning) {
    const auto s = run("sweep --varpi-list 0.25 --a-list 0.015,special --omega0-list 2 --t1 40 --jobs 2");
    ASSERT_EQ(s.code, 0);
    EXPECT_EQ(s.out.substr(0, s.out.find('\n')),
              "varpi,a,omega0,xi,oscillating,fast,slow,fast_amplitude,slow_amplitude,plain_min,window_floor");
    EXPECT_EQ(std::count(s.out.begin(), s.out.end(), '\n'), 3);
    const auto d = run("detuning --drive monotone --f0 1 --t1 1 --n 2");
    ASSERT_EQ(d.code, 0);
    EXPECT_EQ(d.out.substr(0, d.out.find('\n')), "t,f1,delta1");
    EXPECT_NE(d.out.find("\n0,-3,-6\n"), std::string::npos);
}

TEST_F(Cli, TransformAndSimulate) {
    EXPECT_EQ(run("transform --omega0 2 --varpi 0.25 --a 0.015 --ode --t1 5 --n 51").code, 0);
    EXPECT_EQ(run("transform --omega0 2 --t1 5 --n 51").code, 0);
    EXPECT_EQ(run("simulate --drive oscillatory --omega0 2 --varpi 0.25 --special-a --t1 5 --n 51").code, 0);
}
