#include "wcgl/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace wcgl {
namespace fft {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

std::mutex g_plan_mutex;
std::map<int, PlanPair>& plan_cache() {
    static std::map<int, PlanPair> cache;
    return cache;
}

const PlanPair& plans_for(int n) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto& cache = plan_cache();
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    // Dummy buffers only shape the plan; FFTW_UNALIGNED lets us execute on
    // arbitrary std::vector storage later.
    std::vector<std::complex<double>> a(size_t(n) * n), b(size_t(n) * n);
    PlanPair p;
    p.fwd = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()),
                             reinterpret_cast<fftw_complex*>(b.data()),
                             FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()),
                             reinterpret_cast<fftw_complex*>(b.data()),
                             FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    auto [pos, inserted] = cache.emplace(n, p);
    (void)inserted;
    return pos->second;
}

}  // namespace

void forward(int n, const std::complex<double>* in, std::complex<double>* out) {
    const PlanPair& p = plans_for(n);
    fftw_execute_dft(p.fwd,
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void backward(int n, const std::complex<double>* in, std::complex<double>* out) {
    const PlanPair& p = plans_for(n);
    fftw_execute_dft(p.bwd,
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

}  // namespace fft
}  // namespace wcgl
