#include <cmath>
#include <limits>

#include <doctest.h>

#include "semcom/channel.hpp"
#include "semcom/errors.hpp"
#include "semcom/rng.hpp"

using namespace semcom;
using namespace semcom::channel;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("noise_variance follows sigma^2 = P / 10^(SNR/10)") {
    CHECK(noise_variance(1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(noise_variance(1.0, 10.0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(noise_variance(1.0, 20.0) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(noise_variance(4.0, 0.0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(noise_variance(1.0, kInf) == 0.0);
}

TEST_CASE("measured_power is the mean square of the symbols") {
    AnalogFrame f{Image(2, 2)};
    f.symbols.pixels = {1.0, -1.0, 2.0, 0.0};
    CHECK(f.measured_power() == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("awgn_transmit injects noise with the configured variance") {
    AnalogFrame f{Image(300, 300, 1.0)};
    auto rng = make_rng(3, 0);
    const AnalogFrame y = awgn_transmit(f, ChannelConfig{0.0, 0}, rng);
    double var = 0.0;
    for (size_t i = 0; i < y.symbols.size(); ++i) {
        const double n = y.symbols.pixels[i] - f.symbols.pixels[i];
        var += n * n;
    }
    var /= static_cast<double>(y.symbols.size());
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("infinite SNR passes the frame through without consuming RNG") {
    AnalogFrame f{Image(4, 4, 0.7)};
    auto rng = make_rng(9, 0);
    auto fresh = make_rng(9, 0);
    const AnalogFrame y = awgn_transmit(f, ChannelConfig{}, rng);
    CHECK(y.symbols.pixels == f.symbols.pixels);
    CHECK(rng() == fresh());
}

TEST_CASE("zero-power frames cannot carry finite-SNR noise") {
    AnalogFrame f{Image(4, 4, 0.0)};
    auto rng = make_rng(9, 0);
    CHECK_THROWS_AS(awgn_transmit(f, ChannelConfig{10.0, 0}, rng), ValidationError);
}

TEST_CASE("transmit_digital is distortion-free") {
    codec::BitString bits;
    for (int i = 0; i < 40; ++i) bits.push_back(i % 2 == 0);
    CHECK(transmit_digital(bits) == bits);
}

TEST_CASE("remap_timestep is the identity at zero effective noise") {
    const NoiseSchedule sched = make_schedule();
    for (int s : {1, 100, 350, 650, 1000}) {
        const RemapResult r = remap_timestep(s, 0.0, sched);
        CHECK(r.t_prime == s);
        CHECK(r.scale_c == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("remap_timestep finds the smallest matching timestep") {
    const NoiseSchedule sched = make_schedule();
    const int s = 350;
    const double sigma2 = 0.05;
    const RemapResult r = remap_timestep(s, sigma2, sched);
    REQUIRE(r.t_prime >= s);
    const double target =
        (1.0 - sched.alpha_bar(s) + sigma2) / sched.alpha_bar(s);
    auto ratio = [&](int t) { return (1.0 - sched.alpha_bar(t)) / sched.alpha_bar(t); };
    CHECK(ratio(r.t_prime) >= target);
    if (r.t_prime > s) {
        CHECK(ratio(r.t_prime - 1) < target);
    }
    CHECK(r.scale_c ==
          doctest::Approx(std::sqrt(sched.alpha_bar(r.t_prime) / sched.alpha_bar(s)))
              .epsilon(1e-12));
}

TEST_CASE("remap_timestep clamps to T when the schedule runs out") {
    const NoiseSchedule sched = make_schedule();
    const RemapResult r = remap_timestep(990, 1e9, sched);
    CHECK(r.t_prime == sched.T);
}

TEST_CASE("effective_timestep is monotone in SNR") {
    const NoiseSchedule sched = make_schedule();
    for (int s : {1, 200, 350}) {
        int prev = sched.T + 1;
        for (double snr : {-10.0, 0.0, 10.0, 20.0, 40.0}) {
            const RemapResult r = effective_timestep(s, snr, sched);
            CHECK(r.t_prime <= prev);
            CHECK(r.t_prime >= s);
            prev = r.t_prime;
        }
        CHECK(effective_timestep(s, kInf, sched).t_prime == s);
    }
}
