#include "p4green/traces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace p4green {

EnergyTrace EnergyTrace::solar(double sunrise_h, double sunset_h, int peak, double step_minutes) {
    std::vector<Sample> s;
    if (sunrise_h > 0) s.push_back({0.0, 0});
    const double step = step_minutes / 60.0;
    const double length = sunset_h - sunrise_h;
    const int steps = static_cast<int>(std::round(length / step));
    for (int i = 0; i < steps; ++i) {
        const double start = sunrise_h + i * step;
        const double mid = (i + 0.5) * step / length;
        const int v = static_cast<int>(std::lround(peak * std::sin(std::numbers::pi * mid)));
        s.push_back({start, std::clamp(v, 1, 255)});
    }
    s.push_back({sunset_h, 0});
    return EnergyTrace(std::move(s));
}

int EnergyTrace::value_at(double hour) const {
    int v = 0;
    for (const auto& s : samples_) {
        if (s.hour > hour) break;
        v = s.index;
    }
    return v;
}

EnergyTrace EnergyTrace::shifted(double lag_hours) const {
    if (samples_.empty()) return {};
    // Value carried into hour 0 of the shifted day: the original value at
    // hour 24 - lag (mod 24).
    const double wrap = std::fmod(std::fmod(-lag_hours, 24.0) + 24.0, 24.0);
    std::vector<Sample> out;
    out.push_back({0.0, value_at(wrap)});
    for (const auto& s : samples_) {
        double h = std::fmod(std::fmod(s.hour + lag_hours, 24.0) + 24.0, 24.0);
        out.push_back({h, s.index});
    }
    std::stable_sort(out.begin() + 1, out.end(), [](const Sample& a, const Sample& b) { return a.hour < b.hour; });
    // Drop redundant points so the result stays a clean step function.
    std::vector<Sample> clean;
    for (const auto& s : out) {
        if (!clean.empty() && clean.back().hour == s.hour) clean.back() = s;
        else if (!clean.empty() && clean.back().index == s.index) continue;
        else clean.push_back(s);
    }
    return EnergyTrace(std::move(clean));
}

std::vector<double> EnergyTrace::change_points() const {
    std::vector<double> out;
    int v = 0;
    for (const auto& s : samples_) {
        if (s.index != v) out.push_back(s.hour);
        v = s.index;
    }
    return out;
}

double TrafficProfile::rate_at(double hour) const {
    if (rate.empty()) return 0;
    if (hour <= rate.front().hour) return rate.front().rate;
    for (std::size_t i = 1; i < rate.size(); ++i) {
        if (hour <= rate[i].hour) {
            const auto& a = rate[i - 1];
            const auto& b = rate[i];
            if (b.hour == a.hour) return b.rate;
            return a.rate + (b.rate - a.rate) * (hour - a.hour) / (b.hour - a.hour);
        }
    }
    return rate.back().rate;
}

double TrafficProfile::max_rate() const {
    double m = 0;
    for (const auto& s : rate) m = std::max(m, s.rate);
    return m;
}

}  // namespace p4green
