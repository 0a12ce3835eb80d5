#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "hardy/harness.hpp"
#include "oracles.hpp"

using namespace hardy;
namespace fs = std::filesystem;

namespace {

const char* unit_block = R"([experiment]
id = unit
p = 2
q = 2
r = 2
search_budget = 3000
)";

struct TempDir {
    fs::path path;
    TempDir()
    {
        static int counter = 0;
        path = fs::temp_directory_path() / ("hardy_lab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path / name) << text;
        return path / name;
    }
};

std::string read(const fs::path& p)
{
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int cli(const std::string& args, const std::string& env = "")
{
    const char* bin = HARDY_LAB_PATH;
    int status = std::system((env + " " + bin + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> csv_lines(const fs::path& p)
{
    std::vector<std::string> out;
    std::istringstream in(read(p));
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') quoted = !quoted;
        else if (ch == ',' && !quoted) {
            out.push_back(cell);
            cell.clear();
        } else cell += ch;
    }
    out.push_back(cell);
    return out;
}

} // namespace

TEST(Config, ParsesBlocksAndComments)
{
    auto cfgs = parse_config("# campaign\n[experiment]\nid = a\np = 3 # inline\nq=1\nr=2\n\n[experiment]\nmode = lemmas\n");
    ASSERT_EQ(cfgs.size(), 2u);
    EXPECT_EQ(cfgs[0].id, "a");
    EXPECT_EQ(cfgs[0].p, 3.0);
    EXPECT_EQ(cfgs[0].q, 1.0);
    EXPECT_EQ(cfgs[1].mode, Mode::lemmas);
    EXPECT_EQ(cfgs[1].id, "exp2");
    EXPECT_TRUE(parse_config("").empty());
    EXPECT_TRUE(parse_config("# nothing\n\n").empty());
}

TEST(Config, RejectsSmallPWithLine)
{
    try {
        parse_config("[experiment]\nid = x\n\n[experiment]\nid = bad\np = 0.5\n");
        FAIL();
    } catch (const Error& e) {
        std::string m = e.what();
        EXPECT_NE(m.find("line 4"), std::string::npos) << m;
        EXPECT_NE(m.find("only holds for trivial functions"), std::string::npos) << m;
    }
    EXPECT_NO_THROW(parse_config("[experiment]\nmode = monotone\np = 0.5\nq = 0.5\n"));
}

TEST(Config, ParseErrorsCarryLineNumbers)
{
    auto line_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(line_of("[experiment]\np = 2\njunk\n").find("line 3"), std::string::npos);
    EXPECT_NE(line_of("p = 2\n").find("line 1"), std::string::npos);
    EXPECT_NE(line_of("[experiment]\n\np = two\n").find("line 3"), std::string::npos);
    EXPECT_NE(line_of("[experiment]\nq = 1\nbogus = 4\n").find("line 3"), std::string::npos);
    EXPECT_NE(line_of("[experiment]\nu = powr 1 2\n").find("line 1"), std::string::npos);
    EXPECT_NE(line_of("[experiment]\nmode = sideways\n").find("line 2"), std::string::npos);
}

TEST(Config, UnknownKeyIsUnknownParameter)
{
    ExperimentConfig c;
    try {
        set_field(c, "grid", "5");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::unknown_parameter);
    }
}

TEST(Sweep, UnknownParameter)
{
    auto cfgs = parse_config(unit_block);
    try {
        with_param(cfgs, "u", "const 2");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::unknown_parameter);
    }
    EXPECT_THROW(with_param(cfgs, "nonsense", "1"), Error);
}

TEST(Run, UnitRow)
{
    auto rows = run_campaign(parse_config(unit_block));
    ASSERT_EQ(rows.size(), 1u);
    const auto& r = rows[0];
    EXPECT_EQ(r.status, "ok");
    EXPECT_EQ(r.regime, "I");
    EXPECT_LE(oracle::rel(r.constants.at("C1").value(), 0.27217), 1e-4);
    EXPECT_TRUE(r.pass);
    // pass is recomputable from the recorded numbers
    EXPECT_LE(oracle::rel(*r.ratio, r.oracle->value() / r.combined->value()), 1e-15);
    EXPECT_TRUE(*r.ratio <= r.bound_upper && *r.ratio >= 1.0 / r.bound_lower);
}

TEST(Run, ExpectationMismatchFails)
{
    auto rows = run_campaign(parse_config(std::string(unit_block) + "expect.C1 = 0.3\n"));
    EXPECT_FALSE(rows[0].pass);
    EXPECT_NE(rows[0].note.find("expect.C1"), std::string::npos);
}

TEST(Run, RowsCarryTheRegimeConstants)
{
    auto cfgs = parse_config(R"([experiment]
p = 1.5
q = 2
r = 2
search_budget = 500
[experiment]
p = 3
q = 4
r = 2
search_budget = 500
[experiment]
p = 2
q = 1
r = 3
search_budget = 500
[experiment]
p = 3
q = 2
r = 1.5
search_budget = 500
[experiment]
mode = discrete
p = 3
q = 2
r = 1.5
[experiment]
mode = monotone
p = 3
q = 2
search_budget = 500
)");
    auto rows = run_campaign(cfgs, {2, false});
    std::vector<std::vector<std::string>> want = {{"C1"},      {"C2", "C3"}, {"C1", "C4"},
                                                  {"C3", "C5"}, {"A4", "B2"}, {"calC3", "calC5"}};
    ASSERT_EQ(rows.size(), want.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].status, "ok") << rows[i].note;
        EXPECT_EQ(rows[i].constants.size(), want[i].size()) << i;
        for (auto& name : want[i]) EXPECT_TRUE(rows[i].constants.count(name)) << i << " " << name;
    }
    std::ostringstream os;
    write_csv(os, rows);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "# hardy-lab report v1");
    std::getline(in, line);
    auto header = split(line);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::getline(in, line);
        auto cells = split(line);
        ASSERT_EQ(cells.size(), header.size());
        for (auto& name : want[i]) {
            auto col = std::find(header.begin(), header.end(), name) - header.begin();
            EXPECT_FALSE(cells[std::size_t(col)].empty()) << i << " " << name;
        }
    }
}

TEST(Run, FailuresAreIsolated)
{
    auto cfgs = parse_config(R"([experiment]
id = shallow
mode = discrete
p = 3
q = 2
r = 1
trunc_depth = 2
)" + std::string(unit_block));
    auto rows = run_campaign(cfgs);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].status, "error");
    EXPECT_NE(rows[0].note.find("truncation-dominated"), std::string::npos);
    EXPECT_FALSE(rows[0].pass);
    EXPECT_TRUE(rows[1].pass);
    auto ff = run_campaign(cfgs, {1, true});
    EXPECT_EQ(ff.size(), 1u);
}

TEST(SweepLaws, VScaleHomogeneity)
{
    auto cfgs = parse_config(R"([experiment]
p = 3
q = 2
r = 1.5
u = power 1 -0.4 0.2
v = power 1 0.6 0.1
w = power 1 0.3 0.3
search_budget = 200
)");
    std::vector<ReportRow> rows;
    for (const char* lam : {"1", "10", "100"}) rows.push_back(run_campaign(with_param(cfgs, "v_scale", lam))[0]);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        double factor = std::pow(10.0, -double(i) / 3.0);
        for (auto& [name, c] : rows[0].constants)
            EXPECT_LE(oracle::rel(rows[i].constants.at(name).value(), c.value() * factor), 1e-10) << name;
    }
}

TEST(SweepLaws, GridRefinementNonDecreasing)
{
    auto cfgs = parse_config(unit_block);
    double prev = 0.0;
    for (const char* g : {"256", "512", "1024"}) {
        double est = run_campaign(with_param(cfgs, "grid_size", g))[0].oracle->value();
        EXPECT_GE(est, prev * 0.98) << g;
        prev = est;
    }
}

TEST(SweepLaws, TruncationDepthTailDecay)
{
    auto cfgs = parse_config(R"([experiment]
mode = discrete
p = 2
q = 3
r = 2.5
u = power 1 0.2 0.1
v = power 1 0.3 -0.2
w = power 1 -0.3 0.4
)");
    auto a = run_campaign(with_param(cfgs, "trunc_depth", "10"))[0];
    auto b = run_campaign(with_param(cfgs, "trunc_depth", "20"))[0];
    ASSERT_EQ(a.status, "ok") << a.note;
    ASSERT_EQ(b.status, "ok") << b.note;
    for (auto& [name, c] : a.constants) EXPECT_LE(oracle::rel(b.constants.at(name).value(), c.value()), 0.01) << name;
}

TEST(Cli, EmptyCampaign)
{
    TempDir t;
    auto cfg = t.write("empty.cfg", "# nothing here\n");
    EXPECT_EQ(cli("run " + cfg.string() + " --out " + (t.path / "out").string()), 0);
    auto lines = csv_lines(t.path / "out" / "report.csv");
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0], "# hardy-lab report v1");
    EXPECT_TRUE(fs::exists(t.path / "out" / "summary.txt"));
}

TEST(Cli, ExitCodes)
{
    TempDir t;
    auto good = t.write("good.cfg", unit_block);
    auto bad = t.write("bad.cfg", std::string(unit_block) + "expect.C1 = 0.3\n");
    auto broken = t.write("broken.cfg", "[experiment]\np = 0.5\n");
    EXPECT_EQ(cli("run " + good.string() + " --out " + (t.path / "g").string()), 0);
    EXPECT_EQ(cli("run " + bad.string() + " --out " + (t.path / "b").string()), 1);
    EXPECT_EQ(cli("run " + broken.string() + " --out " + (t.path / "x").string()), 2);
    EXPECT_EQ(cli("sweep " + good.string() + " --param u --values 1,2 --out " + (t.path / "s").string()), 2);
}

TEST(Cli, DeterministicCsvAndSeedOverride)
{
    TempDir t;
    auto cfg = t.write("c.cfg", std::string(unit_block) + "\n[experiment]\nid = lem\nmode = lemmas\ncount = 3\ntrunc_depth = 10\nbound_upper = 64\nbound_lower = 64\n");
    ASSERT_EQ(cli("run " + cfg.string() + " --out " + (t.path / "a").string()), 0);
    ASSERT_EQ(cli("run " + cfg.string() + " --jobs 2 --out " + (t.path / "b").string()), 0);
    EXPECT_EQ(read(t.path / "a" / "report.csv"), read(t.path / "b" / "report.csv"));

    ASSERT_EQ(cli("run " + cfg.string() + " --out " + (t.path / "s").string(), "HARDY_LAB_SEED=77"), 0);
    auto lines = csv_lines(t.path / "s" / "report.csv");
    auto header = split(lines[1]);
    auto col = std::size_t(std::find(header.begin(), header.end(), "seed") - header.begin());
    ASSERT_LT(col, header.size());
    for (std::size_t i = 2; i < lines.size(); ++i) EXPECT_EQ(split(lines[i])[col], "77");
    EXPECT_NE(read(t.path / "s" / "report.csv"), read(t.path / "a" / "report.csv"));
}

TEST(Cli, SweepRows)
{
    TempDir t;
    auto cfg = t.write("c.cfg", unit_block);
    ASSERT_EQ(cli("sweep " + cfg.string() + " --param v_scale --values 1,10 --out " + (t.path / "o").string()), 0);
    auto lines = csv_lines(t.path / "o" / "report.csv");
    ASSERT_EQ(lines.size(), 4u);
    auto header = split(lines[1]);
    auto pv = std::size_t(std::find(header.begin(), header.end(), "param_value") - header.begin());
    EXPECT_EQ(split(lines[2])[pv], "1");
    EXPECT_EQ(split(lines[3])[pv], "10");
}

TEST(Cli, FailFastStopsTheCampaign)
{
    TempDir t;
    auto cfg = t.write("c.cfg", std::string(unit_block) + "expect.C1 = 0.3\n\n" + unit_block);
    EXPECT_EQ(cli("run " + cfg.string() + " --fail-fast --out " + (t.path / "o").string()), 1);
    EXPECT_EQ(csv_lines(t.path / "o" / "report.csv").size(), 3u);
    EXPECT_EQ(cli("run " + cfg.string() + " --out " + (t.path / "p").string()), 1);
    EXPECT_EQ(csv_lines(t.path / "p" / "report.csv").size(), 4u);
}

TEST(Cli, SequenceExport)
{
    TempDir t;
    const char* bin = HARDY_LAB_PATH;
    auto out = t.path / "seq.csv";
    ASSERT_EQ(std::system((std::string(bin) + " sequence --w 'const 1' --depth 5 > " + out.string()).c_str()), 0);
    auto lines = csv_lines(out);
    ASSERT_EQ(lines.size(), 8u);
    EXPECT_EQ(lines[0], "index,x,wstar");
    for (int k = 0; k <= 5; ++k) {
        auto cells = split(lines[std::size_t(k + 1)]);
        EXPECT_EQ(std::stoi(cells[0]), k);
        EXPECT_NEAR(std::stod(cells[1]), 1.0 - std::ldexp(1.0, -k), 1e-10);
    }
}
