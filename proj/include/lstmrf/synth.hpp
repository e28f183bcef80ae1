#pragma once

#include "lstmrf/dataio.hpp"

#include <cstdint>
#include <string>

namespace lstmrf {

/// Synthetic daily series: a seasonal target coupled nonlinearly to one
/// exogenous driver (nitrite), linearly to another (temperature), plus a
/// pure-noise column (pressure) that carries no signal by construction.
/// With noise_sigma = 0 the target is exactly its documented closed form
/// (the pressure column stays random — its draws do not depend on
/// noise_sigma), which is what makes planted-signal tests possible.
struct SynthParams {
    std::size_t length = 400;
    std::uint64_t seed = 42;
    double noise_sigma = 0.1;      // eps scale on the target
    double coupling_nitrite = 0.8; // nonlinear driver strength
    double coupling_temp = 0.2;    // linear driver strength
    std::string start_date = "2020-01-01";

    void validate() const;
};

/// Deterministic closed form per index i (days since start), with
/// eta_i, eps_i standard normal draws in that fixed order:
///   temperature = 15 + 5 sin(2 pi i / 365)
///   salinity    = 30 + 1.5 sin(2 pi i / 180 + 0.7)
///   oxygen      = 8 - 0.25 (temperature - 15) + 0.3 sin(2 pi i / 30)
///   nitrite     = 2 + 0.8 sin(2 pi i / 45) + 0.2 sin(2 pi i / 11)
///   pressure    = 1013 + 2 eta_i
///   target      = 2 + 0.5 sin(2 pi i / 73 + 0.3)
///               + coupling_nitrite * tanh(2 (nitrite - 2))
///               + coupling_temp * (temperature - 15) / 5
///               + noise_sigma * eps_i
TimeSeries generate_synthetic(const SynthParams& params);

/// CSV with a '#' comment header documenting the generator parameters and
/// closed form, then columns date,target,temperature,salinity,oxygen,
/// nitrite,pressure. Byte-identical for equal params.
void write_synth_csv(const SynthParams& params, const std::string& path);

} // namespace lstmrf
