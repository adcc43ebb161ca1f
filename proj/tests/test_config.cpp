#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "tricorr/config.hpp"
#include "tricorr/errors.hpp"

using namespace tricorr;

TEST_CASE("config parsing") {
    SUBCASE("keys, comments and whitespace") {
        const RunConfig cfg = RunConfig::from_text(
            "# run at the fitted operating point\n"
            "sigma = 1.34\n"
            "delta0=0.2   # pump detuning\n"
            "delta = 0.26\n"
            "s_q0_in = 15\n"
            "eta_twin = 0.8\n"
            "eta_pump = 0.45\n"
            "cavity_detuning = 0.5\n"
            "block_size = 500\n"
            "seed = 99\n"
            "coupling = on\n");
        CHECK(cfg.opo.sigma == 1.34);
        CHECK(cfg.opo.delta0 == 0.2);
        CHECK(cfg.opo.delta == 0.26);
        CHECK(cfg.opo.excess_pump_phase_noise == 15.0);
        CHECK(cfg.opo.eta_twin == 0.8);
        CHECK(cfg.opo.eta_pump == 0.45);
        CHECK(cfg.cavity.detuning == 0.5);
        CHECK(cfg.block_size == 500);
        CHECK(cfg.seed == 99);
        CHECK(cfg.opo.coupling);
    }
    SUBCASE("unknown keys are rejected by name") {
        try {
            RunConfig::from_text("sigmaa = 1.2\n");
            FAIL("expected config_error");
        } catch (const config_error& e) {
            CHECK(std::string(e.what()).find("sigmaa") != std::string::npos);
        }
    }
    SUBCASE("malformed lines carry line numbers") {
        try {
            RunConfig::from_text("sigma = 1.2\nnot a key value line\n");
            FAIL("expected config_error");
        } catch (const config_error& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("bad numerics rejected") {
        CHECK_THROWS_AS(RunConfig::from_text("sigma = fast\n"), config_error);
        CHECK_THROWS_AS(RunConfig::from_text("seed = -1\n"), config_error);
        CHECK_THROWS_AS(RunConfig::from_text("coupling = maybe\n"), config_error);
    }
    SUBCASE("physical invariants re-validated on load") {
        CHECK_THROWS(RunConfig::from_text("eta_twin = 1.5\n"));
        CHECK_THROWS(RunConfig::from_text("sigma = -1\n"));
        CHECK_THROWS(RunConfig::from_text("block_size = 1\n"));
    }
    SUBCASE("file loading") {
        const auto path = std::filesystem::temp_directory_path() / "tricorr_cfg_test.txt";
        write_file_atomic(path, "sigma = 1.2\nseed = 5\n");
        const RunConfig cfg = RunConfig::from_file(path);
        CHECK(cfg.opo.sigma == 1.2);
        CHECK(cfg.seed == 5);
        std::filesystem::remove(path);
        CHECK_THROWS_AS(RunConfig::from_file(path), config_error);
    }
}

TEST_CASE("atomic writes leave no temp files behind") {
    const auto path = std::filesystem::temp_directory_path() / "tricorr_atomic_test.csv";
    write_file_atomic(path, "a,b\n1,2\n");
    CHECK(std::filesystem::exists(path));
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "a,b\n1,2\n");
    std::filesystem::remove(path);
}

TEST_CASE("sigma-scan CSV roundtrip") {
    SigmaScanData data;
    data.provenance = "synthetic(seed=7)";
    for (int i = 0; i < 4; ++i) {
        SigmaScanPoint p;
        p.sigma = 1.1 + 0.1 * i;
        p.var_q_plus = 0.9 + 0.01 * i;
        p.beta0 = 0.1 + 0.001 * i;
        p.var_q_plus_corrected = p.var_q_plus - p.beta0;
        p.err_q_plus = 0.02;
        p.err_beta0 = 0.003;
        data.points.push_back(p);
    }
    const std::string csv = to_csv(data);
    const SigmaScanData back = sigma_scan_from_csv(csv);
    CHECK(back.provenance == data.provenance);
    REQUIRE(back.points.size() == data.points.size());
    for (std::size_t i = 0; i < data.points.size(); ++i) {
        CHECK(back.points[i].sigma == doctest::Approx(data.points[i].sigma).epsilon(1e-9));
        CHECK(back.points[i].beta0 == doctest::Approx(data.points[i].beta0).epsilon(1e-9));
    }
    CHECK(to_csv(back) == csv);  // byte-stable through a parse/emit cycle

    SUBCASE("truncated rows rejected with line number") {
        try {
            sigma_scan_from_csv("sigma,var_q_plus,beta0,var_q_plus_corr,err_q_plus,err_beta0\n1.1,0.9\n");
            FAIL("expected config_error");
        } catch (const config_error& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("missing header rejected") {
        CHECK_THROWS_AS(sigma_scan_from_csv("1.1,0.9,0.1,0.8,0,0\n"), config_error);
    }
}

TEST_CASE("baseband trace CSV roundtrip") {
    BasebandTrace t;
    t.sample_rate_hz = 600e3;
    t.analysis_freq_hz = 27e6;
    t.seed = 12;
    t.calibration_gain = 1.5;
    t.pump = {0.25, -1.0};
    t.signal = {0.5, 0.125};
    t.idler = {-0.75, 2.0};
    t.shot_ref = {1.0, -0.5};
    const std::string csv = to_csv(t, "phase");
    std::string window;
    const BasebandTrace back = baseband_from_csv(csv, &window);
    CHECK(window == "phase");
    CHECK(back.sample_rate_hz == t.sample_rate_hz);
    CHECK(back.seed == t.seed);
    CHECK(back.calibration_gain == t.calibration_gain);
    CHECK(back.pump == t.pump);
    CHECK(back.signal == t.signal);
    CHECK(back.idler == t.idler);
    CHECK(back.shot_ref == t.shot_ref);
    CHECK(to_csv(back, window) == csv);

    CHECK_THROWS_AS(baseband_from_csv("index,pump,signal\n0,1,2\n", nullptr), config_error);
}

TEST_CASE("fit result key=value emission") {
    FitResult r;
    r.delta0 = 0.2;
    r.delta = 0.26;
    r.s_q0 = 15.0;
    r.residual = 1.25;
    r.iterations = 321;
    r.converged = true;
    const std::string text = to_key_values(r);
    CHECK(text.find("delta0=0.2\n") != std::string::npos);
    CHECK(text.find("delta=0.26\n") != std::string::npos);
    CHECK(text.find("s_q0=15\n") != std::string::npos);
    CHECK(text.find("converged=1\n") != std::string::npos);
}

TEST_CASE("number formatting is stable and precise") {
    CHECK(format_number(0.53) == "0.53");
    CHECK(format_number(1.0 / 3.0) == "0.333333333");
    CHECK(format_number(-2.5e-7) == "-2.5e-07");
}
