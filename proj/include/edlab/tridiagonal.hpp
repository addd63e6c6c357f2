#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace edlab {

/// Thomas algorithm for a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i
/// (a_0 and c_{n-1} ignored). T may be real or complex.
template<class T>
std::vector<T> solve_tridiagonal(std::span<T const> a, std::span<T const> b,
                                 std::span<T const> c, std::span<T const> d)
{
    std::size_t const n = b.size();
    std::vector<T> cp(n);
    std::vector<T> x(n);
    T denom = b[0];
    if (denom == T(0))
        throw std::runtime_error("singular tridiagonal system");
    cp[0] = c[0] / denom;
    x[0] = d[0] / denom;
    for (std::size_t i = 1; i < n; ++i)
    {
        denom = b[i] - a[i] * cp[i - 1];
        if (denom == T(0))
            throw std::runtime_error("singular tridiagonal system");
        cp[i] = i + 1 < n ? c[i] / denom : T(0);
        x[i] = (d[i] - a[i] * x[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;)
        x[i] -= cp[i] * x[i + 1];
    return x;
}

/// Periodic variant: a_0 couples to x_{n-1} and c_{n-1} couples to x_0.
/// Sherman-Morrison correction on top of the Thomas solve.
template<class T>
std::vector<T> solve_cyclic_tridiagonal(std::span<T const> a, std::span<T const> b,
                                        std::span<T const> c, std::span<T const> d)
{
    std::size_t const n = b.size();
    T const alpha = c[n - 1];  // row n-1, column 0
    T const beta = a[0];       // row 0, column n-1
    T const gamma = -b[0];
    std::vector<T> bb(b.begin(), b.end());
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - alpha * beta / gamma;

    auto const x = solve_tridiagonal<T>(a, bb, c, d);
    std::vector<T> u(n, T(0));
    u[0] = gamma;
    u[n - 1] = alpha;
    auto const z = solve_tridiagonal<T>(a, bb, c, u);

    T const fact = (x[0] + beta * x[n - 1] / gamma) / (T(1) + z[0] + beta * z[n - 1] / gamma);
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] - fact * z[i];
    return out;
}

}  // namespace edlab
