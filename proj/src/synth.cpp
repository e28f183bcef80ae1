#include "lstmrf/synth.hpp"

#include "lstmrf/csv.hpp"
#include "lstmrf/errors.hpp"
#include "lstmrf/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace lstmrf {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Civil-calendar day arithmetic (Howard Hinnant's algorithms).
long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    long era = (y >= 0 ? y : y - 399) / 400;
    auto yoe = static_cast<unsigned>(y - static_cast<int>(era) * 400);
    auto doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
    z += 719468;
    long era = (z >= 0 ? z : z - 146096) / 146097;
    auto doe = static_cast<unsigned>(z - era * 146097);
    unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    long yr = static_cast<long>(yoe) + era * 400;
    unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yr + (m <= 2));
}

long parse_start_date(const std::string& text) {
    int y = 0, m = 0, d = 0, consumed = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2d%n", &y, &m, &d, &consumed) != 3 ||
        consumed != 10 || text.size() != 10 || m < 1 || m > 12 || d < 1 || d > 31) {
        throw ValidationError("start_date must be YYYY-MM-DD, got '" + text + "'");
    }
    return days_from_civil(y, m, d);
}

std::string format_date(long day) {
    int y = 0, m = 0, d = 0;
    civil_from_days(day, y, m, d);
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%04d-%02d-%02d", y, m, d);
    return buffer;
}

} // namespace

void SynthParams::validate() const {
    if (length < 2) throw ValidationError("length must be >= 2");
    if (noise_sigma < 0.0) throw ValidationError("noise_sigma must be >= 0");
    parse_start_date(start_date);
}

TimeSeries generate_synthetic(const SynthParams& params) {
    params.validate();
    long start_day = parse_start_date(params.start_date);
    Rng rng(params.seed);

    TimeSeries series;
    series.name = "target";
    series.exo_names = {"temperature", "salinity", "oxygen", "nitrite", "pressure"};
    series.exogenous.assign(series.exo_names.size(), {});

    for (std::size_t i = 0; i < params.length; ++i) {
        auto t = static_cast<double>(i);
        double eta = rng.next_normal();
        double eps = rng.next_normal();

        double temperature = 15.0 + 5.0 * std::sin(kTwoPi * t / 365.0);
        double salinity = 30.0 + 1.5 * std::sin(kTwoPi * t / 180.0 + 0.7);
        double oxygen = 8.0 - 0.25 * (temperature - 15.0) + 0.3 * std::sin(kTwoPi * t / 30.0);
        double nitrite = 2.0 + 0.8 * std::sin(kTwoPi * t / 45.0) + 0.2 * std::sin(kTwoPi * t / 11.0);
        double pressure = 1013.0 + 2.0 * eta;
        double target = 2.0 + 0.5 * std::sin(kTwoPi * t / 73.0 + 0.3) +
                        params.coupling_nitrite * std::tanh(2.0 * (nitrite - 2.0)) +
                        params.coupling_temp * (temperature - 15.0) / 5.0 +
                        params.noise_sigma * eps;

        series.timestamps.push_back(format_date(start_day + static_cast<long>(i)));
        series.target.push_back(target);
        series.exogenous[0].push_back(temperature);
        series.exogenous[1].push_back(salinity);
        series.exogenous[2].push_back(oxygen);
        series.exogenous[3].push_back(nitrite);
        series.exogenous[4].push_back(pressure);
    }
    return series;
}

void write_synth_csv(const SynthParams& params, const std::string& path) {
    TimeSeries series = generate_synthetic(params);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);

    out << "# synthetic daily series\n";
    out << "# length=" << params.length << " seed=" << params.seed
        << " noise_sigma=" << csv::format_double(params.noise_sigma)
        << " coupling_nitrite=" << csv::format_double(params.coupling_nitrite)
        << " coupling_temp=" << csv::format_double(params.coupling_temp)
        << " start_date=" << params.start_date << "\n";
    out << "# target = 2 + 0.5 sin(2 pi i/73 + 0.3)"
           " + coupling_nitrite tanh(2 (nitrite - 2))"
           " + coupling_temp (temperature - 15)/5 + noise_sigma eps_i\n";
    out << "# nitrite = 2 + 0.8 sin(2 pi i/45) + 0.2 sin(2 pi i/11); pressure is pure noise\n";

    out << "date,target,temperature,salinity,oxygen,nitrite,pressure\n";
    for (std::size_t i = 0; i < series.length(); ++i) {
        out << series.timestamps[i] << "," << csv::format_double(series.target[i]);
        for (const auto& column : series.exogenous) {
            out << "," << csv::format_double(column[i]);
        }
        out << "\n";
    }
    if (!out.good()) throw IoError("failed while writing " + path);
}

} // namespace lstmrf
