#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "nolab/report.hpp"
#include "nolab/training.hpp"

using namespace nolab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { fs::remove(path); }
};

}  // namespace

TEST_CASE("container rejects corrupted magic, payload, and truncation") {
    const GridSpec g = make_grid(1, 16, 1.0);
    const Dataset ds = gen_dataset({TargetKind::bessel_inverse, 0.01, -1}, {2.5, 1.0, 1}, g, 3);
    TempFile tf("fmt_ds.bin");
    save_dataset(ds, tf.path);
    const std::string good = slurp(tf.path);
    REQUIRE(good.size() > 16);
    CHECK(good.substr(0, 8) == "NOLABDS1");

    // wrong magic
    std::string bad = good;
    bad[0] = 'X';
    spit(tf.path, bad);
    CHECK_THROWS(load_dataset(tf.path));

    // flipped payload byte breaks the checksum
    bad = good;
    bad[good.size() / 2] ^= 0x40;
    spit(tf.path, bad);
    CHECK_THROWS(load_dataset(tf.path));

    // truncation
    spit(tf.path, good.substr(0, good.size() - 9));
    CHECK_THROWS(load_dataset(tf.path));
    spit(tf.path, good.substr(0, 6));
    CHECK_THROWS(load_dataset(tf.path));

    // intact bytes load fine
    spit(tf.path, good);
    CHECK_NOTHROW(load_dataset(tf.path));
}

TEST_CASE("checkpoint container shares the integrity checks") {
    OperatorConfig arch;
    arch.grid = make_grid(1, 16, 1.0);
    arch.d_v = 2;
    arch.layers = 1;
    arch.k_max = 2;
    const NeuralOperator op = build_operator(arch, 2);
    TempFile tf("fmt_ck.bin");
    save_checkpoint(op, tf.path);
    const std::string good = slurp(tf.path);
    CHECK(good.substr(0, 8) == "NOLABCK1");

    std::string bad = good;
    bad[good.size() - 1] ^= 0x01;  // CRC trailer
    spit(tf.path, bad);
    CHECK_THROWS(load_checkpoint(tf.path));

    spit(tf.path, good);
    const NeuralOperator loaded = load_checkpoint(tf.path);
    CHECK(get_parameters(loaded) == get_parameters(op));
}

TEST_CASE("checkpoint manifest is readable JSON with the declared layout") {
    OperatorConfig arch;
    arch.grid = make_grid(2, 8, 1.0);
    arch.d_v = 2;
    arch.layers = 2;
    arch.k_max = 1;
    arch.activation = ActivationKind::relu;
    const NeuralOperator op = build_operator(arch, 3);
    TempFile tf("fmt_ck2.bin");
    save_checkpoint(op, tf.path);
    const std::string bytes = slurp(tf.path);
    std::uint32_t len = 0;
    std::memcpy(&len, bytes.data() + 8, 4);
    const auto manifest = nlohmann::json::parse(bytes.substr(12, len));
    CHECK(manifest["dim"] == 2);
    CHECK(manifest["n"] == 8);
    CHECK(manifest["d_v"] == 2);
    CHECK(manifest["L"] == 2);
    CHECK(manifest["activation"] == "relu");
    CHECK(manifest["param_order"].is_array());
}

TEST_CASE("report writer emits JSON plus one CSV per series") {
    VerifyReport rep;
    rep.experiment = "writer_check";
    rep.check_le("x", 0.0, 1.0);
    rep.series["vals"] = {1.0, 2.5, -3.0};
    rep.seeds = {42};
    const std::string dir = "report_out_test";
    write_report(rep, dir);
    const auto j = nlohmann::json::parse(slurp(dir + "/writer_check.json"));
    CHECK(j["pass"] == true);
    CHECK(j["seeds"][0] == 42);
    const std::string csv = slurp(dir + "/writer_check_vals.csv");
    CHECK(csv.rfind("index,vals\r\n", 0) == 0);
    CHECK(csv.find("1,2.5\r\n") != std::string::npos);
    fs::remove_all(dir);
}
