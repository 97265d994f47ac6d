#include "fogcode/channel.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

using namespace fogcode;

TEST_SUITE("channel") {

TEST_CASE("bristol profile reproduces the measured bands") {
    const auto profile = channel::DistanceProfile::bristol_rsu1();
    profile.validate();
    CHECK_EQ(profile.per_at(0.0), doctest::Approx(0.20));
    CHECK_EQ(profile.per_at(35.0), doctest::Approx(0.20));
    CHECK_EQ(profile.per_at(35.01), doctest::Approx(0.40));
    CHECK_EQ(profile.per_at(100.0), doctest::Approx(0.40));
    CHECK_EQ(profile.per_at(160.0), doctest::Approx(0.40));
    // ramp midpoint: 0.75 + (230 - 160) / (300 - 160) * 0.15
    CHECK_EQ(profile.per_at(230.0), doctest::Approx(0.825));
    CHECK_EQ(profile.per_at(300.0), doctest::Approx(0.90));
    CHECK_EQ(profile.per_at(300.01), 1.0);
    CHECK_EQ(profile.per_at(1e9), 1.0);
}

TEST_CASE("profile validation") {
    channel::DistanceProfile p;
    p.bands = {{50.0, 0.1}, {40.0, 0.2}};  // bounds must increase
    p.ramp_start_m = 40.0;
    p.ramp_end_m = 60.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    p = channel::DistanceProfile::bristol_rsu1();
    p.bands[0].per = 1.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    p = channel::DistanceProfile::bristol_rsu1();
    p.ramp_per_start = -0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    p = channel::DistanceProfile::bristol_rsu1();
    p.ramp_end_m = p.ramp_start_m - 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("grid lookups floor into cells and default to loss") {
    channel::PerGrid grid;
    grid.cell_size_m = 2.0;
    grid.set_cell(0, 0, 0.8);
    grid.set_cell(-1, -1, 0.5);

    CHECK_EQ(grid.delivery_at(0.0, 0.0), 0.8);
    CHECK_EQ(grid.delivery_at(1.99, 1.99), 0.8);
    CHECK_EQ(grid.delivery_at(2.0, 0.0), 0.0);   // unpopulated neighbour
    CHECK_EQ(grid.delivery_at(-0.01, -0.01), 0.5);
    CHECK_EQ(grid.delivery_at(-2.0, -2.0), 0.5);
    CHECK_EQ(grid.delivery_at(-2.01, 0.0), 0.0);

    grid.origin_x_m = 10.0;
    CHECK_EQ(grid.delivery_at(10.0, 0.0), 0.8);
}

TEST_CASE("cell keys are unique across the int32 plane") {
    using channel::PerGrid;
    CHECK_NE(PerGrid::cell_key(0, 1), PerGrid::cell_key(1, 0));
    CHECK_NE(PerGrid::cell_key(-1, 0), PerGrid::cell_key(0, -1));
    CHECK_EQ(PerGrid::cell_key(-5, 7), PerGrid::cell_key(-5, 7));
}

TEST_CASE("rsu per_at uses 3-D distance and per_scale") {
    channel::RsuProfile rsu;
    rsu.model = channel::DistanceProfile::bristol_rsu1();
    rsu.height_m = 8.0;

    // ground distance 0 is still 8 m slant range, inside the first band
    CHECK_EQ(channel::per_at(rsu, 0.0, 0.0), doctest::Approx(0.20));

    // 3-D distance sqrt(36^2 + 8^2) = 36.88 m crosses the 35 m bound
    rsu.x_m = 36.0;
    CHECK_EQ(channel::per_at(rsu, 0.0, 0.0), doctest::Approx(0.40));

    rsu.per_scale = 1.10;
    CHECK_EQ(channel::per_at(rsu, 0.0, 0.0), doctest::Approx(0.44));

    rsu.per_scale = 10.0;  // scaling clamps into [0, 1]
    CHECK_EQ(channel::per_at(rsu, 0.0, 0.0), 1.0);

    rsu.per_scale = 0.0;
    CHECK_EQ(channel::per_at(rsu, 0.0, 0.0), 0.0);
}

TEST_CASE("rsu per_at reads grids as 1 - delivery") {
    channel::PerGrid grid;
    grid.set_cell(0, 0, 0.8);
    channel::RsuProfile rsu;
    rsu.model = grid;
    CHECK_EQ(channel::per_at(rsu, 1.0, 1.0), doctest::Approx(0.2));
    CHECK_EQ(channel::per_at(rsu, 100.0, 0.0), 1.0);

    rsu.per_scale = 0.85;
    CHECK_EQ(channel::per_at(rsu, 1.0, 1.0), doctest::Approx(0.17));
}

TEST_CASE("calibration constants for the measured deployment") {
    CHECK_EQ(channel::kRsuPerScales[0], 1.0);
    CHECK_EQ(channel::kRsuPerScales[1], 1.10);
    CHECK_EQ(channel::kRsuPerScales[2], 1.0);
    CHECK_EQ(channel::kRsuPerScales[3], 0.85);
    CHECK_EQ(channel::kRsuHeightsM[0], 8.0);
    CHECK_EQ(channel::kRsuHeightsM[1], 5.0);
    CHECK_EQ(channel::kRsuHeightsM[2], 25.0);
    CHECK_EQ(channel::kRsuHeightsM[3], 12.0);
}

TEST_CASE("grid csv loads cells with line-addressed errors") {
    std::istringstream good(
        "x_cell,y_cell,delivery_rate\n"
        "# comment row\n"
        "0,0,0.8\n"
        "\n"
        "-3,2,0.25\n");
    auto grid = channel::load_grid(good, 2.0, 1.0, -1.0);
    CHECK_EQ(grid.cell_size_m, 2.0);
    CHECK_EQ(grid.origin_x_m, 1.0);
    CHECK_EQ(grid.origin_y_m, -1.0);
    CHECK_EQ(grid.cells.size(), 2u);
    CHECK_EQ(grid.delivery_at(1.0, -1.0), 0.8);
    CHECK_EQ(grid.delivery_at(1.0 - 6.0, -1.0 + 4.0), 0.25);

    auto expect_line = [](const std::string& text, std::size_t line) {
        std::istringstream in(text);
        try {
            channel::load_grid(in);
            FAIL("expected GridError at line " << line);
        } catch (const channel::GridError& e) {
            CHECK_EQ(e.line(), line);
        }
    };

    expect_line("", 1);                                            // missing header
    expect_line("x,y,rate\n0,0,0.5\n", 1);                         // wrong header
    expect_line("x_cell,y_cell,delivery_rate\n0,0\n", 2);          // field count
    expect_line("x_cell,y_cell,delivery_rate\n0,zero,0.5\n", 2);   // bad integer
    expect_line("x_cell,y_cell,delivery_rate\n0,0,1.5\n", 2);      // rate range
    expect_line("x_cell,y_cell,delivery_rate\n0,0,-0.1\n", 2);     // rate range
    expect_line("x_cell,y_cell,delivery_rate\n0,0,0.5\n0,0,0.6\n", 3);  // duplicate
    expect_line("x_cell,y_cell,delivery_rate\n0,0,0.5x\n", 2);     // trailing junk
}

TEST_CASE("grid csv accepts windows line endings and spaces") {
    std::istringstream in("x_cell,y_cell,delivery_rate\r\n 0 , 0 , 0.75 \r\n");
    auto grid = channel::load_grid(in);
    CHECK_EQ(grid.delivery_at(0.0, 0.0), 0.75);
}

TEST_CASE("load_grid_file reports missing files") {
    CHECK_THROWS_AS(channel::load_grid_file("/nonexistent/grid.csv"), std::runtime_error);
}

TEST_CASE("splitmix64 reference values") {
    CHECK_EQ(channel::mix_seed(0), 0xE220A8397B1DCDAFull);
    CHECK_EQ(channel::mix_seed(1), 0x910A2DEC89025CC1ull);
    CHECK_NE(channel::mix_seed(2), channel::mix_seed(3));
}

TEST_CASE("rng determinism and erasure bounds") {
    channel::SimRng a(42);
    channel::SimRng b(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform01();
        CHECK_EQ(u, b.uniform01());
        CHECK_GE(u, 0.0);
        CHECK_LT(u, 1.0);
    }

    channel::SimRng c(43);
    CHECK_NE(a.next_u64(), c.next_u64());

    channel::SimRng d(7);
    for (int i = 0; i < 100; ++i) {
        CHECK_FALSE(channel::draw_erasure(0.0, d));
        CHECK(channel::draw_erasure(1.0, d));
    }
}

}  // TEST_SUITE("channel")
