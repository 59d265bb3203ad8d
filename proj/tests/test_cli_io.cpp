#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "msfwi/config.hpp"
#include "msfwi/data_io.hpp"
#include "msfwi/errors.hpp"
#include "msfwi/ricker.hpp"
#include "msfwi/synthesis.hpp"
#include "support/toy.hpp"

using namespace msfwi;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("msfwi_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("ricker spectrum anchors") {
    CHECK(ricker_spectrum(25.0, 0.3, 0.0) == std::complex<double>(0.0, 0.0));

    SUBCASE("|W| peaks within one frequency step of omega_p") {
        const double fc = 25.0;
        const auto omegas = toy::band();
        double best = 0.0, best_w = 0.0;
        for (double w : omegas) {
            const double a = std::abs(ricker_spectrum(fc, 0.7, w));
            if (a > best) {
                best = a;
                best_w = w;
            }
        }
        CHECK(std::abs(best_w - 2.0 * M_PI * fc) <= 2.0 * M_PI * 2.0 + 1e-12);
    }

    SUBCASE("time shift is a pure phase") {
        for (double w : toy::band()) {
            const double a0 = std::abs(ricker_spectrum(25.0, 0.0, w));
            const double a1 = std::abs(ricker_spectrum(25.0, 1.234, w));
            CHECK(a0 == doctest::Approx(a1).epsilon(1e-14));
        }
    }
}

TEST_CASE("seismogram synthesis") {
    SUBCASE("single unit-amplitude frequency gives a pure cosine") {
        const double omega = 2.0 * M_PI * 10.0;
        Eigen::MatrixXcd spectra = Eigen::MatrixXcd::Ones(1, 1);
        Eigen::VectorXd times = uniform_time_axis(0.5, 0.001);
        Eigen::MatrixXd out = synthesize_seismograms(spectra, {omega}, times);
        for (long it = 0; it < times.size(); ++it)
            CHECK(out(0, it) == doctest::Approx(std::cos(omega * times[it])).epsilon(1e-12));
    }

    SUBCASE("hermitian-symmetric synthesis has negligible imaginary part") {
        const auto omegas = toy::band();
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        Eigen::VectorXcd spec(omegas.size());
        for (long k = 0; k < spec.size(); ++k) spec[k] = {dist(rng), dist(rng)};
        // Complex two-sided sum: x(t) = 0.5 sum_k [X e^{iwt} + conj(X) e^{-iwt}].
        double max_imag = 0.0, max_abs = 0.0;
        for (double t = 0.0; t < 0.5; t += 0.004) {
            std::complex<double> acc = 0.0;
            for (size_t k = 0; k < omegas.size(); ++k) {
                const auto ph = std::exp(std::complex<double>(0.0, omegas[k] * t));
                acc += 0.5 * (spec[k] * ph + std::conj(spec[k]) / ph);
            }
            max_imag = std::max(max_imag, std::abs(acc.imag()));
            max_abs = std::max(max_abs, std::abs(acc));
        }
        CHECK(max_imag < 1e-12 * max_abs);
    }

    SUBCASE("ricker band synthesis peaks at the central time") {
        const auto omegas = toy::band();
        const double tc = 0.22, dt = 0.004;
        Eigen::MatrixXcd spectra(1, omegas.size());
        for (size_t k = 0; k < omegas.size(); ++k)
            spectra(0, k) = ricker_spectrum(25.0, tc, omegas[k]);
        Eigen::VectorXd times = uniform_time_axis(0.5, dt);
        Eigen::MatrixXd out = synthesize_seismograms(spectra, omegas, times);
        long peak = 0;
        out.row(0).maxCoeff(&peak);
        CHECK(std::abs(times[peak] - tc) <= dt + 1e-12);
    }
}

TEST_CASE("synthesize_data fundamentals") {
    Grid g = toy::small_grid();
    Model truth = toy::homogeneous(g);
    Acquisition acq = toy::acquisition(g);

    SUBCASE("zero events give zero data") {
        SpectraData d = synthesize_data(truth, {}, acq, 1, std::nullopt);
        for (const auto& rec : d.records) CHECK(rec.norm() == 0.0);
    }

    SUBCASE("the same seed reproduces the data bit for bit") {
        std::vector<EventSpec> evs = {{60.0, 120.0, 25.0, 0.5}};
        SpectraData a = synthesize_data(truth, evs, acq, 42, 5.0, 1);
        SpectraData b = synthesize_data(truth, evs, acq, 42, 5.0, 3);
        for (int iw = 0; iw < a.n_frequencies(); ++iw)
            for (int r = 0; r < a.n_receivers(); ++r)
                CHECK(a.records[iw][r] == b.records[iw][r]);
    }

    SUBCASE("the measured SNR matches the request") {
        std::vector<EventSpec> evs = {{60.0, 120.0, 25.0, 0.5}};
        SpectraData clean = synthesize_data(truth, evs, acq, 9, std::nullopt);
        SpectraData noisy = synthesize_data(truth, evs, acq, 9, 5.0);
        double signal = 0.0, noise = 0.0;
        for (int iw = 0; iw < clean.n_frequencies(); ++iw) {
            signal += clean.records[iw].squaredNorm();
            noise += (noisy.records[iw] - clean.records[iw]).squaredNorm();
        }
        const double snr = 10.0 * std::log10(signal / noise);
        CHECK(std::abs(snr - 5.0) < 0.2);
    }

    SUBCASE("events in the absorbing layers are rejected") {
        // z below the interior bottom lands in the PML.
        std::vector<EventSpec> evs = {{g.nz * g.h + 10.0, 120.0, 25.0, 0.5}};
        CHECK_THROWS_AS(synthesize_data(truth, evs, acq, 1, std::nullopt), ConfigError);
    }
}

TEST_CASE("spectra files round-trip with provenance") {
    TempDir tmp;
    Grid g = toy::small_grid();
    Model truth = toy::homogeneous(g);
    Acquisition acq = toy::acquisition(g);
    std::vector<EventSpec> evs = {{60.0, 120.0, 25.0, 0.5}};
    SpectraData d = synthesize_data(truth, evs, acq, 77, 5.0);

    const std::string path = tmp.file("d.spc");
    write_spectra(d, path);
    SpectraData back = read_spectra(path);
    CHECK(back.omegas == d.omegas);
    CHECK(back.receivers == d.receivers);
    for (int iw = 0; iw < d.n_frequencies(); ++iw)
        for (int r = 0; r < d.n_receivers(); ++r)
            CHECK(back.records[iw][r] == d.records[iw][r]);
    REQUIRE(back.seed.has_value());
    CHECK(*back.seed == 77);
    REQUIRE(back.true_events.size() == 1);
    CHECK(back.true_events[0].f_central_hz == 25.0);

    SUBCASE("payload size mismatch is detected") {
        fs::resize_file(path, fs::file_size(path) - 16);
        CHECK_THROWS_WITH_AS(read_spectra(path), doctest::Contains("dimension mismatch"), IoError);
    }
}

namespace {

std::string write_sample_config(const TempDir& tmp, const std::string& extra = "") {
    const std::string path = tmp.file("run.cfg");
    std::ofstream out(path);
    out << "# sample run\n"
           "[paths]\n"
           "model_true = truth.grd\n"
           "model0 = m0.grd\n"
           "data = d.spc\n"
           "output = out\n"
           "[grid]\n"
           "nz = 24\nnx = 48\nh_m = 5\npml_width = 12\n"
           "[model]\n"
           "v_top_mps = 2250\nv_bottom_mps = 3000\n"
           "layer = 40 60 2600\n"
           "smooth_sigma_cells = 3\n"
           "[acquisition]\n"
           "receiver_depth_m = 10\n"
           "receiver_x_start_m = 10\nreceiver_x_end_m = 230\nreceiver_x_step_m = 10\n"
           "freq_min_hz = 5\nfreq_max_hz = 45\nfreq_step_hz = 2\n"
           "record_duration_s = 1\ndt_s = 0.004\n"
           "[synthesis]\n"
           "event = 60 120 25 0.5\n"
           "snr_db = none\nseed = 7\n"
           "[inversion]\n"
           "lambda = 1000\nn_inner = 10\nn_outer = 1\nupdate_model = false\n"
        << extra;
    return path;
}

}  // namespace

TEST_CASE("run config parsing") {
    TempDir tmp;
    RunConfig cfg = parse_run_config(write_sample_config(tmp));
    CHECK(cfg.grid.nz == 24);
    CHECK(cfg.model.present);
    CHECK(cfg.model.build.layers.size() == 1);
    CHECK(cfg.synthesis.events.size() == 1);
    CHECK(cfg.inversion.lambda == 1000.0);
    CHECK(cfg.band_omegas().size() == 21);
    // Paths resolve relative to the config file.
    CHECK(fs::path(cfg.paths.data).parent_path() == tmp.path);

    Grid g = cfg.make_grid();
    Acquisition acq = cfg.make_acquisition(g);
    CHECK(acq.n_receivers() == 23);
    CHECK(acq.n_frequencies() == 21);

    SUBCASE("unknown keys are rejected") {
        const std::string bad = write_sample_config(tmp, "unknown_key = 3\n");
        CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
    }
    SUBCASE("bad values are rejected") {
        const std::string bad = write_sample_config(tmp, "n_inner = zero\n");
        CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
    }
    SUBCASE("missing file is rejected") {
        CHECK_THROWS_AS(parse_run_config(tmp.file("nope.cfg")), ConfigError);
    }
}
