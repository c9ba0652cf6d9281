#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <string>

#include "fieldscan/errors.hh"
#include "fieldscan/fieldgen.hh"
#include "fieldscan/io.hh"

using namespace fieldscan;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/fstest_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("parse_grid: basic layout") {
    Grid g = parse_grid("1,2,3\n4,5,6\n");
    REQUIRE(g.rows() == 2);
    REQUIRE(g.cols() == 3);
    CHECK(g(0, 0) == 1);
    CHECK(g(1, 2) == 6);

    Grid ws = parse_grid(" 1 , 2 \n 3 , 4 \n\n");  // padding and blank line
    CHECK(ws(1, 1) == 4);

    Grid semi = parse_grid("1;2\n3;4\n", ';');
    CHECK(semi(0, 1) == 2);

    Grid head = parse_grid("a,b\n1,2\n3,4\n", ',', true);
    CHECK(head.rows() == 2);
    CHECK(head(0, 0) == 1);
}

TEST_CASE("parse_grid: malformed input is named precisely") {
    CHECK_THROWS_WITH_AS(parse_grid("1,2\n3\n"),
                         doctest::Contains("row 2"), ParseError);
    CHECK_THROWS_WITH_AS(parse_grid("1,x\n"), doctest::Contains("column 2"),
                         ParseError);
    CHECK_THROWS_AS(parse_grid("1,inf\n"), ParseError);
    CHECK_THROWS_AS(parse_grid(""), ParseError);
    CHECK_THROWS_AS(parse_grid("1,\n2,3\n"), ParseError);
}

TEST_CASE("grid write -> read is bit-exact") {
    Grid g = gen_iid(13, 7, {NoiseDist::StudentT3, 31});
    g(0, 0) = 1.0 / 3.0;
    g(5, 5) = -1e-17;
    TempFile f("roundtrip.csv");
    write_grid(g, {f.path});
    Grid back = read_grid({f.path});
    REQUIRE(back.rows() == g.rows());
    REQUIRE(back.cols() == g.cols());
    CHECK((back.array() == g.array()).all());
}

TEST_CASE("read_grid: missing file") {
    CHECK_THROWS_AS(read_grid({"/nonexistent/nope.csv"}), IOError);
}

TEST_CASE("ndvi: elementwise oracle") {
    Grid red(1, 3), nir(1, 3);
    red << 1, 1, 2;
    nir << 1, 4, 2;
    NdviResult r = ndvi(red, nir);
    CHECK(r.grid(0, 0) == doctest::Approx(0.0));
    CHECK(r.grid(0, 1) == doctest::Approx(0.6));
    CHECK(r.grid(0, 2) == doctest::Approx(0.0));
    CHECK(r.flagged == 0);

    Grid z(1, 1), zn(1, 1);
    z << 0;
    zn << 0;
    NdviResult rz = ndvi(z, zn);
    CHECK(rz.grid(0, 0) == 0.0);
    CHECK(rz.flagged == 1);

    Grid bad(1, 1);
    bad << -1;
    CHECK_THROWS_AS(ndvi(bad, zn), InputError);

    Grid wide(1, 2);
    wide << 1, 1;
    CHECK_THROWS_AS(ndvi(z, wide), DimensionMismatch);
}

TEST_CASE("split_grid and merge_tiles invert each other") {
    Grid g = gen_iid(144, 125, {NoiseDist::StdNormal, 8});
    std::vector<Grid> tiles = split_grid(g, 6, 5);
    REQUIRE(tiles.size() == 30);
    for (const Grid& t : tiles) {
        CHECK(t.rows() == 24);
        CHECK(t.cols() == 25);
    }
    // Row-major tile order: tile 1 sits right of tile 0.
    CHECK(tiles[1](0, 0) == g(0, 25));
    CHECK(tiles[5](0, 0) == g(24, 0));

    Grid back = merge_tiles(tiles, 6, 5);
    CHECK((back.array() == g.array()).all());

    CHECK_THROWS_AS(split_grid(g, 7, 5), NotDivisible);
    CHECK_THROWS_AS(split_grid(g, 6, 4), NotDivisible);
}

TEST_CASE("parse_dependence_spec") {
    DependenceSpec iid = parse_dependence_spec("iid");
    CHECK(iid.kind == DepKind::IID);

    DependenceSpec sma = parse_dependence_spec("sma(1,0.2)");
    CHECK(sma.kind == DepKind::SMA);
    CHECK(sma.q == 1);
    CHECK(sma.rho == 0.2);

    DependenceSpec sar = parse_dependence_spec("sar(40,0.3)");
    CHECK(sar.kind == DepKind::SARApprox);
    CHECK(sar.q == 40);
    CHECK(sar.rho == 0.3);

    CHECK_THROWS_AS(parse_dependence_spec("arma(1,1)"), UnknownKind);
    CHECK_THROWS_AS(parse_dependence_spec("sma(1)"), ConfigError);
}

TEST_CASE("parse_experiment_config: full example") {
    std::string text =
        "# harness configuration\n"
        "n_values = 10, 20\n"
        "s_target = 0.6\n"
        "alpha = 0.05\n"
        "reps = 500\n"
        "tests = gmd, var\n"
        "noise = normal, t3\n"
        "dep = iid, sma(1,0.2)\n"
        "surfaces = a2(0, 0.5, 1), a3(0, 1)\n"
        "decorrelate = true\n"
        "mode = power\n"
        "master_seed = 42\n"
        "threads = 2\n";
    ParsedExperiment p = parse_experiment_config(text);
    CHECK(p.mode == RunMode::Power);
    CHECK(p.explicit_seed);
    const ExperimentConfig& c = p.config;
    CHECK(c.n_values == std::vector<int>{10, 20});
    CHECK(c.reps == 500);
    REQUIRE(c.tests.size() == 2);
    REQUIRE(c.noise.size() == 2);
    CHECK(c.noise[1] == NoiseDist::StudentT3);
    REQUIRE(c.dep.size() == 2);
    CHECK(c.dep[1].kind == DepKind::SMA);
    CHECK(c.dep[1].rho == 0.2);
    REQUIRE(c.surfaces.size() == 2);
    CHECK(c.surfaces[0].kind == SurfaceKind::A2);
    CHECK(c.surfaces[0].amplitudes == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(c.decorrelate);
    CHECK(c.master_seed == 42);
    CHECK(c.threads == 2);
}

TEST_CASE("parse_experiment_config: defaults and errors") {
    ParsedExperiment p = parse_experiment_config("n_values = 20\n");
    CHECK(p.mode == RunMode::Size);
    CHECK_FALSE(p.explicit_seed);
    CHECK(p.config.reps == 1000);
    CHECK(p.config.alpha == 0.05);
    CHECK(p.config.tests.size() == 2);
    CHECK(p.config.surfaces.size() == 1);
    CHECK(p.config.surfaces[0].kind == SurfaceKind::Constant);
    CHECK_FALSE(p.config.decorrelate);

    CHECK_THROWS_AS(parse_experiment_config("bogus_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("reps\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("mode = banana\n"), UnknownKind);

    // An empty list value parses to an empty list; the harness rejects it.
    ParsedExperiment empty = parse_experiment_config("n_values = \n");
    CHECK(empty.config.n_values.empty());
    CHECK_THROWS_AS(simulate_size(empty.config), ConfigError);
}

TEST_CASE("read_experiment_config") {
    TempFile f("exp.cfg");
    write_text_file(f.path, "n_values = 10\nreps = 150\n");
    ParsedExperiment p = read_experiment_config(f.path);
    CHECK(p.config.reps == 150);
    CHECK_THROWS_AS(read_experiment_config("/no/such/file.cfg"), IOError);
}
