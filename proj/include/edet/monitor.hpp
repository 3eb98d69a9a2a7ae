#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace edet {

struct ResourceSample {
    double t = 0.0; // seconds since monitor start, monotonic clock
    std::vector<double> cpu_percent_per_core;
    std::uint64_t resident_bytes = 0;
    std::uint64_t virtual_bytes = 0;
};

struct MonitorSummary {
    std::size_t samples = 0;
    std::vector<double> mean_cpu_per_core;
    std::vector<double> max_cpu_per_core;
    double mean_resident_bytes = 0.0;
    double max_resident_bytes = 0.0;
    double mean_virtual_bytes = 0.0;
    double max_virtual_bytes = 0.0;
};

/// Samples this process's own CPU (per logical core, from per-thread stats)
/// and memory at a fixed period on a background thread. Observation only: it
/// reads OS counters and never touches engine state.
class ResourceMonitor {
public:
    explicit ResourceMonitor(double period_s);
    ~ResourceMonitor();

    ResourceMonitor(const ResourceMonitor&) = delete;
    ResourceMonitor& operator=(const ResourceMonitor&) = delete;

    /// Whether the platform exposes the per-process stat interface.
    static bool supported();

    void start(); // throws MonitorError when unsupported or already running
    void stop();

    std::vector<ResourceSample> samples() const;
    MonitorSummary summary() const;

private:
    void run();
    ResourceSample take_sample(double now_s, double interval_s);

    double period_;
    int cores_;
    long ticks_per_s_;
    std::thread thread_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    bool running_ = false;
    bool stop_requested_ = false;
    std::vector<ResourceSample> samples_;
    std::unordered_map<long, std::uint64_t> prev_ticks_;
    std::unordered_map<long, int> prev_core_;
    std::chrono::steady_clock::time_point start_time_;
};

void write_monitor_csv(const std::vector<ResourceSample>& samples, std::ostream& out);
std::string monitor_summary_json(const MonitorSummary& s);

MonitorSummary summarize(const std::vector<ResourceSample>& samples);

/// Wall-clock seconds of one callable on the monotonic clock.
template <class F>
double time_run(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace edet
