#include "edet/monitor.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "edet/errors.hpp"

namespace edet {

namespace {

struct ThreadTicks {
    long tid = 0;
    std::uint64_t ticks = 0; // utime + stime
    int core = 0;
};

// /proc/<pid>/task/<tid>/stat: everything after the parenthesized comm is a
// space-separated field list; utime/stime are fields 14/15 and the last-run
// processor is field 39 (1-based).
bool parse_stat_line(const std::string& line, ThreadTicks& out) {
    auto close = line.rfind(')');
    if (close == std::string::npos)
        return false;
    std::istringstream rest(line.substr(close + 1));
    std::vector<std::string> tok;
    std::string t;
    while (rest >> t)
        tok.push_back(t);
    if (tok.size() < 37)
        return false;
    std::uint64_t ut = 0, st = 0;
    int core = 0;
    auto parse = [](const std::string& s, auto& v) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        return ec == std::errc{} && p == s.data() + s.size();
    };
    if (!parse(tok[11], ut) || !parse(tok[12], st) || !parse(tok[36], core))
        return false;
    out.ticks = ut + st;
    out.core = core;
    return true;
}

std::vector<ThreadTicks> read_thread_ticks() {
    std::vector<ThreadTicks> out;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator("/proc/self/task", ec)) {
        const std::string tid_s = entry.path().filename().string();
        long tid = 0;
        auto [p, perr] = std::from_chars(tid_s.data(), tid_s.data() + tid_s.size(), tid);
        if (perr != std::errc{} || p != tid_s.data() + tid_s.size())
            continue;
        std::ifstream f(entry.path() / "stat");
        if (!f)
            continue; // thread exited between listing and read
        std::string line;
        std::getline(f, line);
        ThreadTicks tt;
        tt.tid = tid;
        if (parse_stat_line(line, tt))
            out.push_back(tt);
    }
    std::sort(out.begin(), out.end(), [](const ThreadTicks& a, const ThreadTicks& b) {
        return a.tid < b.tid;
    });
    return out;
}

bool read_statm(std::uint64_t& resident, std::uint64_t& virt) {
    std::ifstream f("/proc/self/statm");
    if (!f)
        return false;
    std::uint64_t size_pages = 0, resident_pages = 0;
    f >> size_pages >> resident_pages;
    if (!f)
        return false;
    auto page = static_cast<std::uint64_t>(sysconf(_SC_PAGESIZE));
    virt = size_pages * page;
    resident = resident_pages * page;
    return true;
}

} // namespace

ResourceMonitor::ResourceMonitor(double period_s) : period_(period_s) {
    if (!(period_ > 0.0))
        throw MonitorError("sampling period must be positive");
    unsigned hc = std::thread::hardware_concurrency();
    cores_ = hc == 0 ? 1 : static_cast<int>(hc);
    ticks_per_s_ = sysconf(_SC_CLK_TCK);
    if (ticks_per_s_ <= 0)
        ticks_per_s_ = 100;
}

ResourceMonitor::~ResourceMonitor() {
    try {
        stop();
    } catch (...) {
    }
}

bool ResourceMonitor::supported() {
    std::uint64_t r = 0, v = 0;
    return std::filesystem::exists("/proc/self/task") && read_statm(r, v);
}

void ResourceMonitor::start() {
    std::lock_guard<std::mutex> lock(mu_);
    if (running_)
        throw MonitorError("monitor already running");
    if (!supported())
        throw MonitorError("monitoring unavailable: no per-process stat interface");
    samples_.clear();
    prev_ticks_.clear();
    prev_core_.clear();
    for (const auto& tt : read_thread_ticks()) {
        prev_ticks_[tt.tid] = tt.ticks;
        prev_core_[tt.tid] = tt.core;
    }
    start_time_ = std::chrono::steady_clock::now();
    stop_requested_ = false;
    running_ = true;
    thread_ = std::thread(&ResourceMonitor::run, this);
}

void ResourceMonitor::stop() {
    {
        std::lock_guard<std::mutex> lock(mu_);
        if (!running_)
            return;
        stop_requested_ = true;
    }
    cv_.notify_all();
    thread_.join();
    std::lock_guard<std::mutex> lock(mu_);
    running_ = false;
}

void ResourceMonitor::run() {
    auto deadline = start_time_;
    double last_t = 0.0;
    for (std::size_t k = 1;; ++k) {
        deadline = start_time_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                     std::chrono::duration<double>(period_ * static_cast<double>(k)));
        {
            std::unique_lock<std::mutex> lock(mu_);
            if (cv_.wait_until(lock, deadline, [&] { return stop_requested_; }))
                return;
        }
        double now_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                     start_time_)
                           .count();
        ResourceSample s = take_sample(now_s, now_s - last_t);
        last_t = now_s;
        std::lock_guard<std::mutex> lock(mu_);
        samples_.push_back(std::move(s));
    }
}

ResourceSample ResourceMonitor::take_sample(double now_s, double interval_s) {
    ResourceSample s;
    s.t = now_s;
    s.cpu_percent_per_core.assign(static_cast<std::size_t>(cores_), 0.0);
    if (interval_s > 0.0) {
        double interval_ticks = interval_s * static_cast<double>(ticks_per_s_);
        for (const auto& tt : read_thread_ticks()) {
            auto it = prev_ticks_.find(tt.tid);
            std::uint64_t prev = it == prev_ticks_.end() ? 0 : it->second;
            std::uint64_t delta = tt.ticks >= prev ? tt.ticks - prev : 0;
            prev_ticks_[tt.tid] = tt.ticks;
            prev_core_[tt.tid] = tt.core;
            int core = std::clamp(tt.core, 0, cores_ - 1);
            s.cpu_percent_per_core[static_cast<std::size_t>(core)] +=
                100.0 * static_cast<double>(delta) / interval_ticks;
        }
        for (double& c : s.cpu_percent_per_core)
            c = std::clamp(c, 0.0, 100.0);
    }
    read_statm(s.resident_bytes, s.virtual_bytes);
    return s;
}

std::vector<ResourceSample> ResourceMonitor::samples() const {
    std::lock_guard<std::mutex> lock(mu_);
    return samples_;
}

MonitorSummary ResourceMonitor::summary() const { return summarize(samples()); }

MonitorSummary summarize(const std::vector<ResourceSample>& samples) {
    MonitorSummary m;
    m.samples = samples.size();
    if (samples.empty())
        return m;
    auto cores = samples.front().cpu_percent_per_core.size();
    m.mean_cpu_per_core.assign(cores, 0.0);
    m.max_cpu_per_core.assign(cores, 0.0);
    for (const auto& s : samples) {
        for (std::size_t c = 0; c < cores; ++c) {
            double v = s.cpu_percent_per_core[c];
            m.mean_cpu_per_core[c] += v;
            m.max_cpu_per_core[c] = std::max(m.max_cpu_per_core[c], v);
        }
        auto res = static_cast<double>(s.resident_bytes);
        auto vir = static_cast<double>(s.virtual_bytes);
        m.mean_resident_bytes += res;
        m.max_resident_bytes = std::max(m.max_resident_bytes, res);
        m.mean_virtual_bytes += vir;
        m.max_virtual_bytes = std::max(m.max_virtual_bytes, vir);
    }
    auto n = static_cast<double>(samples.size());
    for (std::size_t c = 0; c < cores; ++c)
        m.mean_cpu_per_core[c] /= n;
    m.mean_resident_bytes /= n;
    m.mean_virtual_bytes /= n;
    return m;
}

void write_monitor_csv(const std::vector<ResourceSample>& samples, std::ostream& out) {
    std::size_t cores = samples.empty() ? 0 : samples.front().cpu_percent_per_core.size();
    out << "t_s";
    for (std::size_t c = 0; c < cores; ++c)
        out << ",core" << c;
    out << ",resident_bytes,virtual_bytes\n";
    char buf[64];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof(buf), "%.6f", s.t);
        out << buf;
        for (double c : s.cpu_percent_per_core) {
            std::snprintf(buf, sizeof(buf), "%.2f", c);
            out << ',' << buf;
        }
        out << ',' << s.resident_bytes << ',' << s.virtual_bytes << '\n';
    }
}

std::string monitor_summary_json(const MonitorSummary& s) {
    nlohmann::json j{{"samples", s.samples},
                     {"mean_cpu_per_core", s.mean_cpu_per_core},
                     {"max_cpu_per_core", s.max_cpu_per_core},
                     {"mean_resident_bytes", s.mean_resident_bytes},
                     {"max_resident_bytes", s.max_resident_bytes},
                     {"mean_virtual_bytes", s.mean_virtual_bytes},
                     {"max_virtual_bytes", s.max_virtual_bytes}};
    return j.dump(2);
}

} // namespace edet
