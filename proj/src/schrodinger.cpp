#include "edlab/schrodinger.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "edlab/csv.hpp"
#include "edlab/errors.hpp"
#include "edlab/tridiagonal.hpp"

namespace edlab {
namespace {

constexpr double pi = std::numbers::pi;
constexpr Complex I{0.0, 1.0};

double norm_of(SpatialGrid const& g, std::span<Complex const> a) noexcept
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += g.weight(i) * std::norm(a[i]);
    return s;
}

// RAII wrapper around a one-shot FFTW plan on a caller-owned buffer.
class FftPlan
{
  public:
    FftPlan(std::vector<Complex>& buf, int sign)
        : plan_(fftw_plan_dft_1d(int(buf.size()), reinterpret_cast<fftw_complex*>(buf.data()),
                                 reinterpret_cast<fftw_complex*>(buf.data()), sign,
                                 FFTW_ESTIMATE))
    {
        if (!plan_)
            throw RuntimeFailure("FFTW could not create a plan");
    }
    FftPlan(FftPlan const&) = delete;
    FftPlan& operator=(FftPlan const&) = delete;
    ~FftPlan() { fftw_destroy_plan(plan_); }

    void execute() const { fftw_execute(plan_); }

  private:
    fftw_plan plan_;
};

}  // namespace

WaveFunction::WaveFunction(SpatialGrid grid, std::vector<Complex> amplitudes, double t)
    : grid_(grid), amps_(std::move(amplitudes)), t_(t)
{
    if (grid_.dim() != 1)
        throw ConfigurationError("wavefunctions are defined on 1-D grids only");
    if (amps_.size() != grid_.n())
        throw ConfigurationError("wavefunction size does not match the grid");
    for (std::size_t i = 0; i < amps_.size(); ++i)
    {
        if (!std::isfinite(amps_[i].real()) || !std::isfinite(amps_[i].imag()))
        {
            std::ostringstream msg;
            msg << "wavefunction amplitude is not finite at node " << i;
            throw RuntimeFailure(msg.str());
        }
    }
    double const nrm = norm();
    if (std::abs(nrm - 1.0) > 1e-10)
    {
        std::ostringstream msg;
        msg << "wavefunction norm must be 1 within 1e-10, got " << nrm;
        throw InvalidDensityError(msg.str());
    }
}

WaveFunction WaveFunction::normalized(SpatialGrid grid, std::vector<Complex> amplitudes,
                                      double t)
{
    if (amplitudes.size() != grid.n())
        throw ConfigurationError("wavefunction size does not match the grid");
    double const nrm = norm_of(grid, amplitudes);
    if (!(nrm > 0) || !std::isfinite(nrm))
        throw InvalidDensityError("cannot normalize a zero or non-finite wavefunction");
    double const scale = 1.0 / std::sqrt(nrm);
    for (auto& a : amplitudes)
        a *= scale;
    return WaveFunction(grid, std::move(amplitudes), t);
}

double WaveFunction::norm() const noexcept
{
    return norm_of(grid_, amps_);
}

ScalarField WaveFunction::density() const
{
    std::vector<double> rho(amps_.size());
    for (std::size_t i = 0; i < rho.size(); ++i)
        rho[i] = std::norm(amps_[i]);
    return ScalarField(grid_, std::move(rho), FieldRole::density);
}

WaveFunction to_wavefunction(HydrodynamicState const& state)
{
    std::size_t const n = state.rho.size();
    std::vector<Complex> amps(n);
    for (std::size_t i = 0; i < n; ++i)
        amps[i] = std::sqrt(state.rho[i]) * std::polar(1.0, state.phi[i]);
    return WaveFunction::normalized(state.grid(), std::move(amps), state.t);
}

std::vector<double> unwrap_phase(WaveFunction const& psi)
{
    std::size_t const n = psi.size();
    std::vector<double> phi(n);
    phi[0] = std::arg(psi[0]);
    for (std::size_t i = 1; i < n; ++i)
        phi[i] = phi[i - 1] + std::remainder(std::arg(psi[i]) - std::arg(psi[i - 1]), 2 * pi);
    return phi;
}

HydrodynamicState from_wavefunction(WaveFunction const& psi)
{
    auto rho = psi.density();
    double const floor_value = density_floor * rho.max();
    for (std::size_t i = 0; i < rho.size(); ++i)
    {
        if (rho[i] <= floor_value)
        {
            std::ostringstream msg;
            msg << "wavefunction has a node at " << i << " (x = " << psi.grid().x(i)
                << "); the phase is undefined there";
            throw NodalStateError(msg.str());
        }
    }
    auto phi = unwrap_phase(psi);
    for (std::size_t i = 1; i < phi.size(); ++i)
    {
        double const jump = std::abs(phi[i] - phi[i - 1]);
        if (jump >= pi * (1 - 1e-12))
        {
            std::ostringstream msg;
            msg << "phase jump of " << jump << " between nodes " << i - 1 << " and " << i
                << " reaches pi; the grid is too coarse to unwrap";
            throw AliasingError(msg.str());
        }
    }
    return HydrodynamicState(std::move(rho), ScalarField(psi.grid(), std::move(phi)), psi.t());
}

WaveFunction cn_step(WaveFunction const& psi, ScalarField const& potential, double dt,
                     PhysicalConstants const& consts)
{
    if (!(psi.grid() == potential.grid()))
        throw ConfigurationError("cn_step: potential lives on a different grid");
    if (!(dt > 0) || !std::isfinite(dt))
        throw DomainError("cn_step: dt must be positive and finite");
    auto const& g = psi.grid();
    std::size_t const n = g.n();
    double const kin = consts.eta() * consts.eta() / (2 * consts.mass()) / (g.h() * g.h());

    // H = tridiag(lo, diag, up); zero-flux ends double the inward coupling.
    std::vector<double> lo(n, -kin), up(n, -kin), diag(n);
    for (std::size_t i = 0; i < n; ++i)
        diag[i] = 2 * kin + potential[i];
    if (!g.periodic())
    {
        up[0] = -2 * kin;
        lo[n - 1] = -2 * kin;
        lo[0] = 0;
        up[n - 1] = 0;
    }

    Complex const f = I * dt / (2 * consts.eta());
    auto const a = psi.amplitudes();
    std::vector<Complex> rhs(n), sa(n), sb(n), sc(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        Complex const left = a[(i + n - 1) % n];
        Complex const right = a[(i + 1) % n];
        Complex h_psi = diag[i] * a[i];
        if (g.periodic() || i > 0)
            h_psi += lo[i] * left;
        if (g.periodic() || i + 1 < n)
            h_psi += up[i] * right;
        rhs[i] = a[i] - f * h_psi;
        sa[i] = f * lo[i];
        sb[i] = 1.0 + f * diag[i];
        sc[i] = f * up[i];
    }
    std::vector<Complex> next;
    try
    {
        next = g.periodic() ? solve_cyclic_tridiagonal<Complex>(sa, sb, sc, rhs)
                            : solve_tridiagonal<Complex>(sa, sb, sc, rhs);
    }
    catch (std::runtime_error const& e)
    {
        throw RuntimeFailure(std::string("cn_step: ") + e.what());
    }
    return WaveFunction(g, std::move(next), psi.t() + dt);
}

WaveFunction ground_state(ScalarField const& potential, PhysicalConstants const& consts)
{
    auto const& g = potential.grid();
    std::size_t const n = g.n();
    double const kin = consts.eta() * consts.eta() / (2 * consts.mass()) / (g.h() * g.h());
    // Below the spectrum, so H - shift is positive definite.
    double const shift = potential.min() - 1.0;
    std::vector<double> lo(n, -kin), up(n, -kin), diag(n);
    for (std::size_t i = 0; i < n; ++i)
        diag[i] = 2 * kin + potential[i] - shift;
    if (!g.periodic())
    {
        up[0] = -2 * kin;
        lo[n - 1] = -2 * kin;
        lo[0] = 0;
        up[n - 1] = 0;
    }

    auto normalize = [&](std::vector<double>& v) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            s += g.weight(i) * v[i] * v[i];
        double const scale = 1 / std::sqrt(s);
        for (auto& x : v)
            x *= scale;
    };
    std::vector<double> v(n, 1.0);
    normalize(v);
    for (int it = 0; it < 10000; ++it)
    {
        std::vector<double> next;
        try
        {
            next = g.periodic() ? solve_cyclic_tridiagonal<double>(lo, diag, up, v)
                                : solve_tridiagonal<double>(lo, diag, up, v);
        }
        catch (std::runtime_error const& e)
        {
            throw RuntimeFailure(std::string("ground_state: ") + e.what());
        }
        normalize(next);
        double change = 0;
        for (std::size_t i = 0; i < n; ++i)
            change = std::max(change, std::abs(next[i] - v[i]));
        v = std::move(next);
        if (change < 1e-14)
        {
            std::vector<Complex> amps(v.begin(), v.end());
            return WaveFunction::normalized(g, std::move(amps));
        }
    }
    throw NoSolutionError("ground_state: inverse iteration did not converge");
}

WaveFunction splitstep_step(WaveFunction const& psi, ScalarField const& potential,
                            double dt, PhysicalConstants const& consts)
{
    auto const& g = psi.grid();
    if (!g.periodic())
        throw ConfigurationError("splitstep_step needs a periodic grid");
    if (!(g == potential.grid()))
        throw ConfigurationError("splitstep_step: potential lives on a different grid");
    if (!(dt >= 0) || !std::isfinite(dt))
        throw DomainError("splitstep_step: dt must be non-negative and finite");
    if (dt == 0)
        return psi;

    std::size_t const n = g.n();
    double const eta = consts.eta();
    std::vector<Complex> buf(psi.amplitudes().begin(), psi.amplitudes().end());
    FftPlan forward(buf, FFTW_FORWARD);
    FftPlan backward(buf, FFTW_BACKWARD);

    for (std::size_t i = 0; i < n; ++i)
        buf[i] *= std::polar(1.0, -potential[i] * dt / (2 * eta));
    forward.execute();
    double const dk = 2 * pi / g.length();
    for (std::size_t j = 0; j < n; ++j)
    {
        double const mode = j <= n / 2 ? double(j) : double(j) - double(n);
        double const k = mode * dk;
        buf[j] *= std::polar(1.0 / double(n), -eta * k * k * dt / (2 * consts.mass()));
    }
    backward.execute();
    for (std::size_t i = 0; i < n; ++i)
        buf[i] *= std::polar(1.0, -potential[i] * dt / (2 * eta));
    return WaveFunction(g, std::move(buf), psi.t() + dt);
}

Complex analytic_amplitude(AnalyticState const& kind, double x, double t,
                           PhysicalConstants const& consts)
{
    double const eta = consts.eta();
    double const m = consts.mass();
    if (auto const* fg = std::get_if<FreeGaussian>(&kind))
    {
        double const s2 = fg->s0 * fg->s0;
        Complex const spread = 1.0 + I * (eta * t / (2 * m * s2));
        double const dx = x - fg->x0;
        Complex const exponent =
            (-dx * dx / (4 * s2) + I * fg->k0 * dx - I * fg->k0 * fg->k0 * s2 * (spread.imag()))
            / spread;
        return std::pow(2 * pi * s2, -0.25) / std::sqrt(spread) * std::exp(exponent);
    }
    auto const& hg = std::get<HarmonicGround>(kind);
    double const a = m * hg.omega / eta;
    return std::pow(a / pi, 0.25) * std::exp(-0.5 * a * x * x)
           * std::polar(1.0, -0.5 * hg.omega * t);
}

double analytic_variance(AnalyticState const& kind, double t, PhysicalConstants const& consts)
{
    if (auto const* fg = std::get_if<FreeGaussian>(&kind))
    {
        double const s2 = fg->s0 * fg->s0;
        double const tau = consts.eta() * t / (2 * consts.mass() * s2);
        return s2 * (1 + tau * tau);
    }
    auto const& hg = std::get<HarmonicGround>(kind);
    return consts.eta() / (2 * consts.mass() * hg.omega);
}

WaveFunction analytic_oracle(AnalyticState const& kind, double t, SpatialGrid const& grid,
                             PhysicalConstants const& consts)
{
    if (auto const* fg = std::get_if<FreeGaussian>(&kind); fg && !(fg->s0 > 0))
        throw DomainError("free Gaussian needs s0 > 0");
    if (auto const* hg = std::get_if<HarmonicGround>(&kind); hg && !(hg->omega > 0))
        throw DomainError("harmonic ground state needs omega > 0");
    std::vector<Complex> amps(grid.n());
    for (std::size_t i = 0; i < amps.size(); ++i)
        amps[i] = analytic_amplitude(kind, grid.x(i), t, consts);
    return WaveFunction::normalized(grid, std::move(amps), t);
}

DensityMoments density_moments(ScalarField const& rho)
{
    auto const& g = rho.grid();
    double mass = 0, mean = 0;
    for (std::size_t i = 0; i < rho.size(); ++i)
    {
        mass += g.weight(i) * rho[i];
        mean += g.weight(i) * rho[i] * g.x(i);
    }
    mean /= mass;
    double var = 0;
    for (std::size_t i = 0; i < rho.size(); ++i)
    {
        double const d = g.x(i) - mean;
        var += g.weight(i) * rho[i] * d * d;
    }
    return {mean, var / mass};
}

void write_wavefunction_csv(WaveFunction const& psi, std::ostream& os)
{
    write_csv_header(os, {"node_coordinate", "re", "im", "rho", "phi_unwrapped"});
    auto const phi = unwrap_phase(psi);
    for (std::size_t i = 0; i < psi.size(); ++i)
    {
        double const row[] = {psi.grid().x(i), psi[i].real(), psi[i].imag(),
                              std::norm(psi[i]), phi[i]};
        write_csv_row(os, row);
    }
}

}  // namespace edlab
