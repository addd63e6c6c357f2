#include "edlab/hydro.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "edlab/csv.hpp"
#include "edlab/errors.hpp"
#include "edlab/tridiagonal.hpp"

namespace edlab {
namespace {

constexpr double two_pi = 2 * std::numbers::pi;

double wrap_phase(double d) noexcept
{
    return std::remainder(d, two_pi);
}

std::size_t face_count(SpatialGrid const& g) noexcept
{
    return g.periodic() ? g.n() : g.n() - 1;
}

// Phase difference across face k (node k to node k+1), reduced mod 2 pi.
std::vector<double> face_phase_differences(SpatialGrid const& g, std::span<double const> phi)
{
    std::size_t const n = g.n();
    std::vector<double> d(face_count(g));
    for (std::size_t k = 0; k < d.size(); ++k)
        d[k] = wrap_phase(phi[(k + 1) % n] - phi[k]);
    return d;
}

struct Reach
{
    std::size_t edge;
    std::size_t dist;
};

// Nodes above the floor, and for every node the nearest populated node on each
// side (wrapping on periodic grids).
struct Populated
{
    std::vector<char> active;
    std::vector<std::optional<Reach>> left, right;
};

Populated populated(SpatialGrid const& g, std::span<double const> rho)
{
    std::size_t const n = g.n();
    double peak = 0;
    for (double r : rho)
        peak = std::max(peak, r);
    if (!(peak > 0))
        throw InvalidDensityError("density is zero everywhere; nothing above the floor");
    double const floor_value = density_floor * peak;

    Populated p{std::vector<char>(n), std::vector<std::optional<Reach>>(n),
                std::vector<std::optional<Reach>>(n)};
    for (std::size_t i = 0; i < n; ++i)
        p.active[i] = rho[i] > floor_value;
    std::size_t const passes = g.periodic() ? 2 * n : n;
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::size_t last = none;
    std::size_t dist = 0;
    for (std::size_t k = 0; k < passes; ++k)
    {
        std::size_t const i = k % n;
        ++dist;
        if (last != none && !p.left[i])
            p.left[i] = Reach{last, dist};
        if (p.active[i])
        {
            last = i;
            dist = 0;
        }
    }
    last = none;
    for (std::size_t k = 0; k < passes; ++k)
    {
        std::size_t const i = n - 1 - k % n;
        ++dist;
        if (last != none && !p.right[i])
            p.right[i] = Reach{last, dist};
        if (p.active[i])
        {
            last = i;
            dist = 0;
        }
    }
    return p;
}

// Neighbour of i in direction dir, if any.
std::optional<std::size_t> neighbour(SpatialGrid const& g, std::size_t i, int dir)
{
    std::size_t const n = g.n();
    if (g.periodic())
        return dir > 0 ? (i + 1) % n : (i + n - 1) % n;
    if ((dir < 0 && i == 0) || (dir > 0 && i + 1 == n))
        return std::nullopt;
    return dir > 0 ? i + 1 : i - 1;
}

// log rho^(1/2) with the sub-floor tails replaced by a quadratic continuation
// of the populated edges. A flat clamp would leave a kink in rho^(1/2) where
// the density crosses the floor, and the quantum potential would spike there.
// Gaps bounded by two edges blend both continuations as a sum of amplitudes.
std::vector<double> log_root_density(SpatialGrid const& g, std::span<double const> rho)
{
    std::size_t const n = g.n();
    auto const pop = populated(g, rho);
    std::vector<double> lp(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (pop.active[i])
            lp[i] = 0.5 * std::log(rho[i]);

    // Continuation from edge e, which lies `dir` away from the tail, over d nodes.
    auto continuation = [&](Reach r, int dir) {
        double slope = 0;
        double curv = 0;
        if (auto i1 = neighbour(g, r.edge, dir); i1 && pop.active[*i1])
        {
            slope = lp[r.edge] - lp[*i1];
            if (auto i2 = neighbour(g, *i1, dir); i2 && pop.active[*i2])
                curv = std::min(0.0, lp[r.edge] - 2 * lp[*i1] + lp[*i2]);
        }
        slope = std::min(0.0, slope);
        double const k = double(r.dist);
        return lp[r.edge] + slope * k + 0.5 * curv * k * (k + 1);
    };

    std::vector<double> out = lp;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (pop.active[i])
            continue;
        std::optional<double> a, b;
        if (pop.left[i])
            a = continuation(*pop.left[i], -1);
        if (pop.right[i])
            b = continuation(*pop.right[i], +1);
        if (a && b)
        {
            double const hi = std::max(*a, *b);
            out[i] = hi + std::log(std::exp(*a - hi) + std::exp(*b - hi));
        }
        else if (a || b)
            out[i] = a ? *a : *b;
    }
    return out;
}

// Overwrites the phase below the floor with a constant-velocity continuation
// of the nearest populated edge, so the Hamilton-Jacobi flow cannot steepen
// into a shock where there is no density to carry it.
void extend_phase(SpatialGrid const& g, std::span<double const> rho, std::span<double> phi)
{
    std::size_t const n = g.n();
    auto const pop = populated(g, rho);
    std::vector<double> const src(phi.begin(), phi.end());
    for (std::size_t i = 0; i < n; ++i)
    {
        if (pop.active[i])
            continue;
        auto const& l = pop.left[i];
        auto const& r = pop.right[i];
        if (!l && !r)
            continue;
        int dir = -1;
        Reach reach;
        if (l && (!r || l->dist <= r->dist))
            reach = *l;
        else
        {
            reach = *r;
            dir = +1;
        }
        double slope = 0;
        if (auto i1 = neighbour(g, reach.edge, dir); i1 && pop.active[*i1])
            slope = wrap_phase(src[reach.edge] - src[*i1]);
        phi[i] = src[reach.edge] + slope * double(reach.dist);
    }
}

// lap(psi)/psi from log psi, with the same boundary stencil as laplacian().
std::vector<double> laplacian_ratio(SpatialGrid const& g, std::span<double const> log_psi)
{
    std::size_t const n = g.n();
    double const inv_h2 = 1.0 / (g.h() * g.h());
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        double lap;
        if (i > 0 && i + 1 < n)
            lap = std::exp(log_psi[i + 1] - log_psi[i]) + std::exp(log_psi[i - 1] - log_psi[i]) - 2;
        else if (g.periodic())
            lap = std::exp(log_psi[(i + 1) % n] - log_psi[i])
                  + std::exp(log_psi[(i + n - 1) % n] - log_psi[i]) - 2;
        else if (i == 0)
            lap = 2 * (std::exp(log_psi[1] - log_psi[0]) - 1);
        else
            lap = 2 * (std::exp(log_psi[n - 2] - log_psi[n - 1]) - 1);
        q[i] = lap * inv_h2;
    }
    return q;
}

void phase_rate_raw(SpatialGrid const& g, std::span<double const> phi,
                    std::span<double const> rho, std::span<double const> pot,
                    PhysicalConstants const& consts, std::span<double> out)
{
    std::size_t const n = g.n();
    double const eta = consts.eta();
    double const coeff = eta * eta / (2 * consts.mass());
    double const inv_h2 = 1.0 / (g.h() * g.h());
    auto const d = face_phase_differences(g, phi);
    auto const q = laplacian_ratio(g, log_root_density(g, rho));
    for (std::size_t i = 0; i < n; ++i)
    {
        double grad_sq;
        if (g.periodic())
            grad_sq = 0.5 * (d[i] * d[i] + d[(i + n - 1) % n] * d[(i + n - 1) % n]);
        else if (i == 0)
            grad_sq = d[0] * d[0];
        else if (i + 1 == n)
            grad_sq = d[n - 2] * d[n - 2];
        else
            grad_sq = 0.5 * (d[i] * d[i] + d[i - 1] * d[i - 1]);
        out[i] = -(coeff * grad_sq * inv_h2 + pot[i] - coeff * q[i]) / eta;
    }
}

std::vector<double> face_velocities(SpatialGrid const& g, std::span<double const> phi,
                                    PhysicalConstants const& consts)
{
    auto v = face_phase_differences(g, phi);
    double const scale = consts.eta() / consts.mass() / g.h();
    for (auto& x : v)
        x *= scale;
    return v;
}

void density_rate_raw(SpatialGrid const& g, std::span<double const> rho,
                      std::span<double const> face_v, std::span<double> out)
{
    std::size_t const n = g.n();
    std::size_t const nf = face_count(g);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < nf; ++k)
    {
        std::size_t const r = (k + 1) % n;
        double const flux = face_v[k] * 0.5 * (rho[k] + rho[r]);
        out[k] -= flux;
        out[r] += flux;
    }
    for (std::size_t i = 0; i < n; ++i)
        out[i] /= g.weight(i);
}

void check_cfl(SpatialGrid const& g, std::span<double const> rho,
               std::span<double const> face_v, double dt)
{
    std::size_t const n = g.n();
    double peak = 0;
    for (double r : rho)
        peak = std::max(peak, r);
    double const floor_value = density_floor * peak;
    double worst = 0;
    std::size_t worst_face = 0;
    for (std::size_t k = 0; k < face_v.size(); ++k)
    {
        if (std::max(rho[k], rho[(k + 1) % n]) <= floor_value)
            continue;
        double const c = std::abs(face_v[k]) * dt / g.h();
        if (c > worst)
        {
            worst = c;
            worst_face = k;
        }
    }
    if (worst > 0.5)
    {
        std::ostringstream msg;
        msg << "time step violates the CFL bound max|v| dt / h <= 0.5 (got " << worst
            << " at x = " << g.x(worst_face) + 0.5 * g.h() << " with dt = " << dt
            << ", h = " << g.h() << ")";
        throw StepSizeError(msg.str());
    }
}

// Zero out negatives, rescale to target mass, report what was removed.
double clip_and_renormalize(SpatialGrid const& g, std::vector<double>& rho, double target)
{
    double clipped = 0;
    for (std::size_t i = 0; i < rho.size(); ++i)
    {
        if (rho[i] < 0)
        {
            clipped -= g.weight(i) * rho[i];
            rho[i] = 0;
        }
    }
    if (clipped > 0)
    {
        double const mass = integrate(g, rho);
        if (!(mass > 0))
            throw InvalidDensityError("density vanished after clipping negative values");
        for (auto& r : rho)
            r *= target / mass;
    }
    return clipped;
}

FpStepResult fp_faces_unchecked(ScalarField const& rho, std::span<double const> face_v,
                                double dt)
{
    auto const& g = rho.grid();
    std::size_t const n = g.n();
    auto const r = rho.values();
    if (dt == 0)
        return {rho, 0.0};

    // rho_dot = A rho; row i couples to i-1, i, i+1.
    std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        bool const has_right = g.periodic() || i + 1 < n;
        bool const has_left = g.periodic() || i > 0;
        double const v_right = has_right ? face_v[i] : 0.0;
        double const v_left = has_left ? face_v[(i + n - 1) % n] : 0.0;
        double const w = g.weight(i);
        upper[i] = -v_right / (2 * w);
        lower[i] = v_left / (2 * w);
        diag[i] = -(v_right - v_left) / (2 * w);
    }

    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        double ar = diag[i] * r[i];
        if (g.periodic() || i > 0)
            ar += lower[i] * r[(i + n - 1) % n];
        if (g.periodic() || i + 1 < n)
            ar += upper[i] * r[(i + 1) % n];
        rhs[i] = r[i] + 0.5 * dt * ar;
    }
    std::vector<double> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        a[i] = -0.5 * dt * lower[i];
        b[i] = 1.0 - 0.5 * dt * diag[i];
        c[i] = -0.5 * dt * upper[i];
    }
    auto next = g.periodic() ? solve_cyclic_tridiagonal<double>(a, b, c, rhs)
                             : solve_tridiagonal<double>(a, b, c, rhs);
    double const clipped = clip_and_renormalize(g, next, integrate(rho));
    return {ScalarField(g, std::move(next), FieldRole::density), clipped};
}

void require_finite_state(std::span<double const> values, char const* what)
{
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        if (!std::isfinite(values[i]))
        {
            std::ostringstream msg;
            msg << what << " became non-finite at node " << i;
            throw InstabilityError(msg.str());
        }
    }
}

}  // namespace

ScalarField drift_velocity(ScalarField const& entropy, PhysicalConstants const& consts)
{
    return consts.diffusion() * gradient(entropy);
}

ScalarField osmotic_velocity(ScalarField const& rho, PhysicalConstants const& consts)
{
    auto clamped = clamp_to_floor(rho);
    for (auto& v : clamped.values)
        v = 0.5 * std::log(v);
    return -consts.diffusion() * gradient(ScalarField(rho.grid(), std::move(clamped.values)));
}

ScalarField phase_gradient(ScalarField const& phi)
{
    auto const& g = phi.grid();
    std::size_t const n = g.n();
    auto const d = face_phase_differences(g, phi.values());
    double const inv2h = 0.5 / g.h();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        if (g.periodic())
            out[i] = (d[i] + d[(i + n - 1) % n]) * inv2h;
        else if (i == 0)
            out[i] = (3 * d[0] - d[1]) * inv2h;
        else if (i + 1 == n)
            out[i] = (3 * d[n - 2] - d[n - 3]) * inv2h;
        else
            out[i] = (d[i] + d[i - 1]) * inv2h;
    }
    return ScalarField(g, std::move(out));
}

ScalarField current_velocity(ScalarField const& phi, PhysicalConstants const& consts)
{
    return consts.diffusion() * phase_gradient(phi);
}

VelocityFields velocity_fields(ScalarField const& entropy, ScalarField const& rho,
                               PhysicalConstants const& consts)
{
    auto b = drift_velocity(entropy, consts);
    auto u = osmotic_velocity(rho, consts);
    auto v = current_velocity(phase_from_entropy(entropy, rho).phi, consts);
    return {std::move(b), std::move(u), std::move(v)};
}

PhaseMap phase_from_entropy(ScalarField const& entropy, ScalarField const& rho)
{
    require_same_grid(entropy, rho, "phase_from_entropy");
    auto clamped = clamp_to_floor(rho);
    std::vector<double> phi(entropy.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
        phi[i] = entropy[i] - 0.5 * std::log(clamped.values[i]);
    return {ScalarField(rho.grid(), std::move(phi), FieldRole::phase), clamped.clamped_nodes};
}

ScalarField entropy_from_phase(ScalarField const& phi, ScalarField const& rho)
{
    require_same_grid(phi, rho, "entropy_from_phase");
    auto clamped = clamp_to_floor(rho);
    std::vector<double> s(phi.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = phi[i] + 0.5 * std::log(clamped.values[i]);
    return ScalarField(rho.grid(), std::move(s), FieldRole::entropy);
}

ScalarField quantum_potential(ScalarField const& rho, PhysicalConstants const& consts)
{
    auto q = laplacian_ratio(rho.grid(), log_root_density(rho.grid(), rho.values()));
    double const coeff = consts.eta() * consts.eta() / (2 * consts.mass());
    for (auto& v : q)
        v *= coeff;
    return ScalarField(rho.grid(), std::move(q));
}

FpStepResult fp_step(ScalarField const& rho, ScalarField const& v, double dt)
{
    require_same_grid(rho, v, "fp_step");
    if (!(dt >= 0) || !std::isfinite(dt))
        throw DomainError("fp_step: dt must be non-negative and finite");
    auto const& g = rho.grid();
    double vmax = 0;
    for (double x : v.values())
        vmax = std::max(vmax, std::abs(x));
    double const courant = vmax * dt / g.h();
    if (courant > 0.5)
    {
        std::ostringstream msg;
        msg << "fp_step: time step violates the CFL bound max|v| dt / h <= 0.5 (got "
            << courant << ")";
        throw StepSizeError(msg.str());
    }
    std::size_t const n = g.n();
    std::vector<double> faces(face_count(g));
    for (std::size_t k = 0; k < faces.size(); ++k)
        faces[k] = 0.5 * (v[k] + v[(k + 1) % n]);
    return fp_faces_unchecked(rho, faces, dt);
}

FpStepResult fp_step_faces(ScalarField const& rho, std::span<double const> face_v, double dt)
{
    auto const& g = rho.grid();
    if (face_v.size() != face_count(g))
        throw ConfigurationError("fp_step_faces: wrong number of face velocities");
    if (!(dt >= 0) || !std::isfinite(dt))
        throw DomainError("fp_step_faces: dt must be non-negative and finite");
    check_cfl(g, rho.values(), face_v, dt);
    return fp_faces_unchecked(rho, face_v, dt);
}

ScalarField phase_rate(ScalarField const& phi, ScalarField const& rho,
                       ScalarField const& potential, PhysicalConstants const& consts)
{
    require_same_grid(phi, rho, "phase_rate");
    require_same_grid(phi, potential, "phase_rate");
    std::vector<double> out(phi.size());
    phase_rate_raw(phi.grid(), phi.values(), rho.values(), potential.values(), consts, out);
    return ScalarField(phi.grid(), std::move(out));
}

ScalarField density_rate(ScalarField const& rho, ScalarField const& phi,
                         PhysicalConstants const& consts)
{
    require_same_grid(phi, rho, "density_rate");
    auto const fv = face_velocities(rho.grid(), phi.values(), consts);
    std::vector<double> out(rho.size());
    density_rate_raw(rho.grid(), rho.values(), fv, out);
    return ScalarField(rho.grid(), std::move(out));
}

ScalarField phase_step(ScalarField const& phi, ScalarField const& rho,
                       ScalarField const& potential, double dt,
                       PhysicalConstants const& consts)
{
    auto const rate = phase_rate(phi, rho, potential, consts);
    std::vector<double> out(phi.size());
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        double const change = dt * rate[i];
        if (std::abs(change) > 1e6)
        {
            std::ostringstream msg;
            msg << "phase_step: phase changed by " << change << " at node " << i
                << " (x = " << phi.grid().x(i) << ") in one step; explicit update unstable";
            throw InstabilityError(msg.str());
        }
        out[i] = phi[i] + change;
    }
    return ScalarField(phi.grid(), std::move(out), FieldRole::phase);
}

namespace {

CoupledStepResult strang_step(HydrodynamicState const& s, ScalarField const& pot, double dt,
                              PhysicalConstants const& consts)
{
    auto const& g = s.grid();
    std::size_t const n = g.n();
    auto const phi0 = s.phi.values();
    check_cfl(g, s.rho.values(), face_velocities(g, phi0, consts), dt);

    // Half phase step, implicit in phi: phi_h = phi_0 + dt/2 R(phi_h, rho_0).
    std::vector<double> half(phi0.begin(), phi0.end());
    std::vector<double> next(n);
    std::vector<double> rate(n);
    auto const active = populated(g, s.rho.values()).active;
    bool converged = false;
    for (int it = 0; it < 100 && !converged; ++it)
    {
        phase_rate_raw(g, half, s.rho.values(), pot.values(), consts, rate);
        for (std::size_t i = 0; i < n; ++i)
            next[i] = phi0[i] + 0.5 * dt * rate[i];
        extend_phase(g, s.rho.values(), next);
        double change = 0;
        double scale = 1;
        for (std::size_t i = 0; i < n; ++i)
        {
            if (!active[i])
                continue;
            change = std::max(change, std::abs(next[i] - half[i]));
            scale = std::max(scale, std::abs(next[i]));
        }
        half.swap(next);
        require_finite_state(half, "phase");
        converged = change <= 1e-14 * scale;
    }
    if (!converged)
        throw InstabilityError("coupled_step: implicit half phase step did not converge; "
                               "reduce dt");

    auto const fv = face_velocities(g, half, consts);
    auto fp = fp_step_faces(s.rho, fv, dt);

    phase_rate_raw(g, half, fp.rho.values(), pot.values(), consts, rate);
    std::vector<double> phi1(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        phi1[i] = half[i] + 0.5 * dt * rate[i];
        if (std::abs(phi1[i] - phi0[i]) > 1e6)
            throw InstabilityError("coupled_step: phase jumped by more than 1e6 in one step");
    }
    extend_phase(g, fp.rho.values(), phi1);
    require_finite_state(phi1, "phase");
    return {HydrodynamicState(std::move(fp.rho), ScalarField(g, std::move(phi1)), s.t + dt),
            fp.clipped_mass};
}

CoupledStepResult rk4_step(HydrodynamicState const& s, ScalarField const& pot, double dt,
                           PhysicalConstants const& consts)
{
    auto const& g = s.grid();
    std::size_t const n = g.n();
    std::vector<double> rho0(s.rho.values().begin(), s.rho.values().end());
    std::vector<double> phi0(s.phi.values().begin(), s.phi.values().end());

    check_cfl(g, rho0, face_velocities(g, phi0, consts), dt);

    auto eval = [&](std::vector<double> const& r, std::vector<double> const& p,
                    std::vector<double>& dr, std::vector<double>& dp) {
        auto const fv = face_velocities(g, p, consts);
        density_rate_raw(g, r, fv, dr);
        phase_rate_raw(g, p, r, pot.values(), consts, dp);
    };

    std::array<std::vector<double>, 4> kr, kp;
    for (auto& v : kr)
        v.resize(n);
    for (auto& v : kp)
        v.resize(n);
    std::vector<double> rt(n), pt(n);
    double const c[] = {0.5, 0.5, 1.0};
    eval(rho0, phi0, kr[0], kp[0]);
    for (int stage = 1; stage < 4; ++stage)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            rt[i] = rho0[i] + c[stage - 1] * dt * kr[stage - 1][i];
            pt[i] = phi0[i] + c[stage - 1] * dt * kp[stage - 1][i];
        }
        eval(rt, pt, kr[stage], kp[stage]);
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        rt[i] = rho0[i] + dt / 6 * (kr[0][i] + 2 * kr[1][i] + 2 * kr[2][i] + kr[3][i]);
        pt[i] = phi0[i] + dt / 6 * (kp[0][i] + 2 * kp[1][i] + 2 * kp[2][i] + kp[3][i]);
    }
    require_finite_state(rt, "density");
    require_finite_state(pt, "phase");
    double const clipped = clip_and_renormalize(g, rt, integrate(s.rho));
    extend_phase(g, rt, pt);
    return {HydrodynamicState(ScalarField(g, std::move(rt), FieldRole::density),
                              ScalarField(g, std::move(pt)), s.t + dt),
            clipped};
}

}  // namespace

CoupledStepResult coupled_step(HydrodynamicState const& state, ScalarField const& potential,
                               double dt, PhysicalConstants const& consts,
                               CoupledIntegrator integrator)
{
    require_same_grid(state.rho, potential, "coupled_step");
    if (!(dt > 0) || !std::isfinite(dt))
        throw DomainError("coupled_step: dt must be positive and finite");
    if (integrator == CoupledIntegrator::rk4)
        return rk4_step(state, potential, dt, consts);
    return strang_step(state, potential, dt, consts);
}

EnergyReport energy(HydrodynamicState const& state, ScalarField const& potential,
                    PhysicalConstants const& consts)
{
    require_same_grid(state.rho, potential, "energy");
    auto const& g = state.grid();
    std::size_t const n = g.n();
    double const coeff = consts.eta() * consts.eta() / (2 * consts.mass());
    double const h = g.h();
    auto const rho = state.rho.values();
    auto const d = face_phase_differences(g, state.phi.values());

    EnergyReport e;
    for (std::size_t k = 0; k < d.size(); ++k)
    {
        std::size_t const r = (k + 1) % n;
        double const rho_face = 0.5 * (rho[k] + rho[r]);
        e.kinetic_current += h * rho_face * (d[k] / h) * (d[k] / h);
        double const dpsi = (std::sqrt(rho[r]) - std::sqrt(rho[k])) / h;
        e.kinetic_osmotic += h * dpsi * dpsi;
    }
    e.kinetic_current *= coeff;
    e.kinetic_osmotic *= coeff;
    for (std::size_t i = 0; i < n; ++i)
        e.potential += g.weight(i) * potential[i] * rho[i];
    e.total = e.kinetic_current + e.kinetic_osmotic + e.potential;
    return e;
}

ScalarField hj_residual(ScalarField const& phi, ScalarField const& potential,
                        ScalarField const& phi_dot, PhysicalConstants const& consts)
{
    require_same_grid(phi, potential, "hj_residual");
    require_same_grid(phi, phi_dot, "hj_residual");
    auto const grad = gradient(phi);
    double const eta = consts.eta();
    double const coeff = eta * eta / (2 * consts.mass());
    std::vector<double> out(phi.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = eta * phi_dot[i] + coeff * grad[i] * grad[i] + potential[i];
    return ScalarField(phi.grid(), std::move(out));
}

void require_nodeless(ScalarField const& rho)
{
    auto const& g = rho.grid();
    std::size_t const n = g.n();
    double const floor_value = density_floor * rho.max();
    auto above = [&](std::size_t i) { return rho[i] > floor_value; };

    std::size_t rises = 0;  // transitions from below the floor to above it
    std::size_t const limit = g.periodic() ? n : n - 1;
    for (std::size_t k = 0; k < limit; ++k)
        if (!above(k) && above((k + 1) % n))
            ++rises;
    bool const nodal = g.periodic() ? rises > 1 : rises > (above(0) ? 0u : 1u);
    if (nodal)
    {
        std::ostringstream msg;
        msg << "density has an interior node (drops to the floor " << floor_value
            << " between populated regions); (rho, phi) is singular there";
        throw ConfigurationError(msg.str());
    }
}

void write_energy_csv_header(std::ostream& os)
{
    write_csv_header(os, {"t", "kinetic_current", "kinetic_osmotic", "potential", "total"});
}

void write_energy_csv_row(std::ostream& os, double t, EnergyReport const& e)
{
    double const row[] = {t, e.kinetic_current, e.kinetic_osmotic, e.potential, e.total};
    write_csv_row(os, row);
}

}  // namespace edlab
