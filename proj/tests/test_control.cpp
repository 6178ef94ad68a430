#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "evasim/control.hpp"
#include "evasim/dynamics.hpp"

using namespace evasim;
using Catch::Approx;

namespace {
constexpr double kDt = 1.0 / 120.0;
}

TEST_CASE("torque law substitution cases") {
    const ControllerGains gains;
    SECTION("zero errors, zero integral") {
        auto [torque, next] = controller_torque({}, {}, gains, kDt);
        REQUIRE(torque == 0.0);
        REQUIRE(next.integral_e_y == 0.0);
    }
    SECTION("unit lateral error alone yields a1") {
        PreviewErrors e;
        e.e_y_near = 1.0;
        // dt small enough that the integral contribution vanishes at double
        // precision, matching the dt -> 0 reading of the published gains.
        auto [torque, _] = controller_torque(e, {}, gains, 1e-18);
        REQUIRE(torque == 0.19);
    }
    SECTION("raw 41.99 clamps to the 5 N*m cap") {
        PreviewErrors e;
        e.e_y_near = 10.0;
        e.e_theta_far = 10.0;
        e.e_theta_far_rate = 10.0;
        ControllerState c;
        const double dt = 1.0 / 128.0;  // exactly representable
        c.integral_e_y = 10.0 - 10.0 * dt;  // integral equals 10 after the advance
        auto [torque, _] = controller_torque(e, c, gains, dt);
        REQUIRE(torque == 5.0);
    }
}

TEST_CASE("saturation bound holds over randomized inputs") {
    const ControllerGains gains;
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> big(-1e4, 1e4);
    ControllerState c;
    for (int i = 0; i < 20000; ++i) {
        PreviewErrors e{big(gen), big(gen), big(gen)};
        auto [torque, next] = controller_torque(e, c, gains, kDt);
        REQUIRE(std::abs(torque) <= gains.torque_limit);
        c = next;
    }
}

TEST_CASE("with a2 = 0 the controller is memoryless in e_y") {
    ControllerGains gains;
    gains.a2 = 0.0;
    const PreviewErrors probe{0.4, -0.02, 0.01};

    ControllerState fresh;
    auto [direct, _] = controller_torque(probe, fresh, gains, kDt);

    // Arbitrary history first, then the same probe.
    ControllerState c;
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 100; ++i) {
        auto [t2, next] = controller_torque({u(gen), u(gen), u(gen)}, c, gains, kDt);
        (void)t2;
        c = next;
    }
    auto [after_history, _2] = controller_torque(probe, c, gains, kDt);
    REQUIRE(after_history == direct);
}

TEST_CASE("linearity below saturation") {
    const ControllerGains gains;
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    for (int i = 0; i < 1000; ++i) {
        PreviewErrors e{u(gen), u(gen), u(gen)};
        ControllerState c;
        c.integral_e_y = u(gen);
        const double s = 2.5;
        PreviewErrors se{s * e.e_y_near, s * e.e_theta_far, s * e.e_theta_far_rate};
        ControllerState sc;
        sc.integral_e_y = s * c.integral_e_y;
        auto [t1, _1] = controller_torque(e, c, gains, kDt);
        auto [t2, _2] = controller_torque(se, sc, gains, kDt);
        if (std::abs(t2) < gains.torque_limit && std::abs(t1 * s) < gains.torque_limit)
            REQUIRE(t2 == Approx(s * t1).margin(1e-12));
    }
}

TEST_CASE("conditional integration freezes the integral during saturation") {
    const ControllerGains gains;
    ControllerState c;
    PreviewErrors deep{100.0, 0.0, 0.0};
    for (int i = 0; i < 50; ++i) {
        auto [torque, next] = controller_torque(deep, c, gains, kDt);
        REQUIRE(torque == gains.torque_limit);
        REQUIRE(next.integral_e_y == c.integral_e_y);  // frozen
        c = next;
    }
    // One step after the error reverses, the output is off the +5 rail.
    auto [torque, _] = controller_torque({-100.0, 0.0, 0.0}, c, gains, kDt);
    REQUIRE(torque < gains.torque_limit);
}

TEST_CASE("reset clears integral and derivative memory") {
    ControllerState c;
    c.integral_e_y = 3.0;
    c.prev_e_theta_far = 0.4;
    c.has_prev = true;
    const ControllerState r = reset(c);
    REQUIRE(r.integral_e_y == 0.0);
    REQUIRE(r.prev_e_theta_far == 0.0);
    REQUIRE_FALSE(r.has_prev);
    const ControllerState rr = reset(r);
    REQUIRE(rr.integral_e_y == r.integral_e_y);
    REQUIRE(rr.has_prev == r.has_prev);

    auto [torque, _] = controller_torque({}, r, ControllerGains{}, kDt);
    REQUIRE(torque == 0.0);
}

TEST_CASE("preview errors against a straight trajectory") {
    const StraightLanePath path(0.0, -50.0, 500.0);
    const PreviewConfig preview;
    VehicleState v;
    v.vx = 8.333;

    SECTION("on the path, aligned") {
        const PreviewErrors e = preview_errors(v, path, preview, {}, kDt);
        REQUIRE(e.e_y_near == 0.0);
        REQUIRE(e.e_theta_far == 0.0);
        REQUIRE(e.e_theta_far_rate == 0.0);
    }
    SECTION("one meter left of the path") {
        v.y = -1.0;  // left is negative y in the simulation frame
        const PreviewErrors e = preview_errors(v, path, preview, {}, kDt);
        REQUIRE(e.e_y_near == Approx(1.0).epsilon(1e-12));
        REQUIRE(e.e_theta_far == 0.0);
    }
    SECTION("small yaw with zero CG offset, by independent construction") {
        const double phi = 0.05;
        v.yaw = phi;
        const PreviewErrors e = preview_errors(v, path, preview, {}, kDt);
        // Near point sits at y = near * sin(phi); the target offset is 0.
        REQUIRE(e.e_y_near == Approx(-preview.near_distance * std::sin(phi)).epsilon(1e-12));
        REQUIRE(e.e_theta_far == Approx(-phi).epsilon(1e-12));
    }
    SECTION("far-point rate by backward difference") {
        ControllerState c;
        const PreviewErrors e1 = preview_errors(v, path, preview, c, kDt);
        REQUIRE(e1.e_theta_far_rate == 0.0);  // no memory yet
        auto [t1, c1] = controller_torque(e1, c, ControllerGains{}, kDt);
        (void)t1;
        v.yaw = 0.01;
        const PreviewErrors e2 = preview_errors(v, path, preview, c1, kDt);
        REQUIRE(e2.e_theta_far_rate ==
                Approx((e2.e_theta_far - e1.e_theta_far) / kDt).epsilon(1e-12));
    }
    SECTION("preview station outside the domain names the station") {
        const StraightLanePath short_path(0.0, 0.0, 10.0);
        v.x = 0.0;
        REQUIRE_THROWS_WITH(preview_errors(v, short_path, preview, {}, kDt),
                            Catch::Matchers::ContainsSubstring("20.0"));
    }
}

TEST_CASE("positive e_y steers the vehicle back toward the target") {
    // Vehicle one meter left of a straight target: closed loop through the
    // column and bicycle dynamics must shrink the error.
    const VehicleParams params;
    const ControllerGains gains;
    const PreviewConfig preview;
    const StraightLanePath path(0.0, -50.0, 500.0);

    VehicleState v;
    v.vx = 8.333;
    v.y = -1.0;
    ControllerState c;
    const double initial_error = 1.0;
    for (int i = 0; i < 120 * 3; ++i) {
        const PreviewErrors e = preview_errors(v, path, preview, c, kDt);
        auto [torque, next] = controller_torque(e, c, gains, kDt);
        c = next;
        v = step_vehicle(v, params, torque, 0.0, kDt);
    }
    REQUIRE(std::abs(v.y - 0.0) < initial_error * 0.8);
}
