#include "isac/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace isac::fft {
namespace {

// Plans are cached per (length, direction) and created with FFTW_ESTIMATE so
// that algorithm selection never depends on runtime measurement: repeated
// runs produce bit-identical results. FFTW_UNALIGNED lets one plan execute
// on any caller buffer. Plan creation is serialized (FFTW planning is not
// thread-safe); execution on distinct buffers is.
std::mutex g_plan_mutex;
std::unordered_map<std::uint64_t, fftw_plan> g_plans;

fftw_plan plan_for(int n, int sign) {
    const std::uint64_t key = (static_cast<std::uint64_t>(n) << 1) | (sign == FFTW_BACKWARD);
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto it = g_plans.find(key);
    if (it != g_plans.end()) return it->second;
    std::vector<std::complex<double>> scratch(static_cast<size_t>(n));
    fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(scratch.data()),
                                   reinterpret_cast<fftw_complex*>(scratch.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw std::runtime_error("fftw plan creation failed");
    g_plans.emplace(key, p);
    return p;
}

void run(std::span<std::complex<double>> x, int sign) {
    if (x.empty()) return;
    fftw_plan p = plan_for(static_cast<int>(x.size()), sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(x.data());
    fftw_execute_dft(p, ptr, ptr);
}

}  // namespace

void forward(std::span<std::complex<double>> x) { run(x, FFTW_FORWARD); }
void inverse(std::span<std::complex<double>> x) { run(x, FFTW_BACKWARD); }

}  // namespace isac::fft
