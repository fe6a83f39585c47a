#include "asr/paths.hpp"

#include "asr/rng.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace asr {

// Wichura (1988), algorithm AS241, PPND16.
double normal_icdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw ParameterError("normal_icdf: p must lie in (0,1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double v;
    if (r <= 5.0) {
        r -= 1.6;
        v = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        v = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -v : v;
}

void MarketParams::validate() const {
    if (!(s0 > 0.0))
        throw ParameterError("MarketParams: s0 must be positive");
    if (sigma < 0.0)
        throw ParameterError("MarketParams: sigma must be non-negative");
    if (!(dt > 0.0))
        throw ParameterError("MarketParams: dt must be positive");
}

namespace {

PathSet simulate_impl(const MarketParams& params, int n_paths, int n_cols, uint64_t seed,
                      SplitTag tag, bool parallel) {
    params.validate();
    if (n_paths < 1)
        throw ParameterError("simulate_gbm: n_paths must be >= 1");
    if (n_cols < 2)
        throw ParameterError("simulate_gbm: n_cols must be >= 2");

    PathSet ps;
    ps.n_paths = n_paths;
    ps.n_cols = n_cols;
    ps.seed = seed;
    ps.split_tag = tag;
    ps.prices.resize(static_cast<size_t>(n_paths) * n_cols);

    const double drift = (params.rate - 0.5 * params.sigma * params.sigma) * params.dt;
    const double vol = params.sigma * std::sqrt(params.dt);

#pragma omp parallel for schedule(static) if (parallel)
    for (int p = 0; p < n_paths; ++p) {
        double* row = ps.prices.data() + static_cast<size_t>(p) * n_cols;
        row[0] = params.s0;
        for (int k = 0; k + 1 < n_cols; ++k) {
            const double z = normal_draw(seed, static_cast<uint64_t>(p), static_cast<uint64_t>(k));
            row[k + 1] = row[k] * std::exp(drift + vol * z);
        }
    }
    return ps;
}

} // namespace

PathSet simulate_gbm(const MarketParams& params, int n_paths, int n_cols, uint64_t seed,
                     SplitTag tag) {
    return simulate_impl(params, n_paths, n_cols, seed, tag, true);
}

PathSet simulate_gbm_serial(const MarketParams& params, int n_paths, int n_cols, uint64_t seed,
                            SplitTag tag) {
    return simulate_impl(params, n_paths, n_cols, seed, tag, false);
}

SeedTriple split_seeds(uint64_t base_seed) {
    // Role constants keep the three streams disjoint across any base.
    return SeedTriple{
        rng::counter_hash(base_seed, 0x7261696eULL, 1),
        rng::counter_hash(base_seed, 0x76616c69ULL, 2),
        rng::counter_hash(base_seed, 0x74657374ULL, 3),
    };
}

void save_pathset_csv(const PathSet& ps, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f)
        throw std::runtime_error("save_pathset_csv: cannot open " + path);
    std::fprintf(f, "# n_paths=%d n_cols=%d seed=%llu\n", ps.n_paths, ps.n_cols,
                 static_cast<unsigned long long>(ps.seed));
    for (int p = 0; p < ps.n_paths; ++p) {
        const double* row = ps.row(p);
        for (int k = 0; k < ps.n_cols; ++k)
            std::fprintf(f, k + 1 == ps.n_cols ? "%.17g\n" : "%.17g,", row[k]);
    }
    std::fclose(f);
}

} // namespace asr
