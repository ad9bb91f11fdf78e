#pragma once

// Forward-mode dual numbers over an arbitrary scalar. Nesting Dual<Dual<T,N>,N>
// yields second derivatives; instantiating T = taylor::Expr records the
// derivative computation onto a tape.

#include <array>
#include <cmath>

namespace polar {

template <class T, int N>
struct Dual {
    T v{};
    std::array<T, N> d{};

    Dual() = default;
    Dual(double c) : v(c) {} // NOLINT(google-explicit-constructor)
    Dual(const T& value, const std::array<T, N>& deriv) : v(value), d(deriv) {}

    static Dual variable(const T& value, int i)
    {
        Dual x;
        x.v = value;
        x.d[static_cast<std::size_t>(i)] = T(1.0);
        return x;
    }
};

template <class T, int N>
Dual<T, N> operator+(const Dual<T, N>& a, const Dual<T, N>& b)
{
    Dual<T, N> r;
    r.v = a.v + b.v;
    for (std::size_t i = 0; i < N; ++i)
        r.d[i] = a.d[i] + b.d[i];
    return r;
}

template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a, const Dual<T, N>& b)
{
    Dual<T, N> r;
    r.v = a.v - b.v;
    for (std::size_t i = 0; i < N; ++i)
        r.d[i] = a.d[i] - b.d[i];
    return r;
}

template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a)
{
    Dual<T, N> r;
    r.v = -a.v;
    for (std::size_t i = 0; i < N; ++i)
        r.d[i] = -a.d[i];
    return r;
}

template <class T, int N>
Dual<T, N> operator*(const Dual<T, N>& a, const Dual<T, N>& b)
{
    Dual<T, N> r;
    r.v = a.v * b.v;
    for (std::size_t i = 0; i < N; ++i)
        r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}

template <class T, int N>
Dual<T, N> operator/(const Dual<T, N>& a, const Dual<T, N>& b)
{
    Dual<T, N> r;
    r.v = a.v / b.v;
    for (std::size_t i = 0; i < N; ++i)
        r.d[i] = (a.d[i] - r.v * b.d[i]) / b.v;
    return r;
}

template <class T, int N>
Dual<T, N> operator+(const Dual<T, N>& a, double c)
{
    Dual<T, N> r = a;
    r.v = a.v + c;
    return r;
}
template <class T, int N>
Dual<T, N> operator+(double c, const Dual<T, N>& a)
{
    return a + c;
}
template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a, double c)
{
    Dual<T, N> r = a;
    r.v = a.v - c;
    return r;
}
template <class T, int N>
Dual<T, N> operator-(double c, const Dual<T, N>& a)
{
    Dual<T, N> r = -a;
    r.v = c - a.v;
    return r;
}
template <class T, int N>
Dual<T, N> operator*(const Dual<T, N>& a, double c)
{
    Dual<T, N> r;
    r.v = a.v * c;
    for (std::size_t i = 0; i < N; ++i)
        r.d[i] = a.d[i] * c;
    return r;
}
template <class T, int N>
Dual<T, N> operator*(double c, const Dual<T, N>& a)
{
    return a * c;
}
template <class T, int N>
Dual<T, N> operator/(const Dual<T, N>& a, double c)
{
    return a * (1.0 / c);
}
template <class T, int N>
Dual<T, N> operator/(double c, const Dual<T, N>& a)
{
    Dual<T, N> r;
    r.v = c / a.v;
    const T k = -r.v / a.v;
    for (std::size_t i = 0; i < N; ++i)
        r.d[i] = k * a.d[i];
    return r;
}

template <class T, int N>
Dual<T, N>& operator+=(Dual<T, N>& a, const Dual<T, N>& b) { return a = a + b; }
template <class T, int N>
Dual<T, N>& operator-=(Dual<T, N>& a, const Dual<T, N>& b) { return a = a - b; }
template <class T, int N>
Dual<T, N>& operator*=(Dual<T, N>& a, const Dual<T, N>& b) { return a = a * b; }

template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a)
{
    using std::sqrt;
    Dual<T, N> r;
    r.v = sqrt(a.v);
    const T k = 0.5 / r.v;
    for (std::size_t i = 0; i < N; ++i)
        r.d[i] = k * a.d[i];
    return r;
}

/// Value and gradient of a scalar function of N variables.
template <int N, class F, class T>
std::array<T, N> gradient(F&& f, const std::array<T, N>& x, T* value = nullptr)
{
    std::array<Dual<T, N>, N> xd;
    for (int i = 0; i < N; ++i)
        xd[static_cast<std::size_t>(i)] = Dual<T, N>::variable(x[static_cast<std::size_t>(i)], i);
    Dual<T, N> y = f(xd);
    if (value)
        *value = y.v;
    return y.d;
}

/// Jacobian of a vector function of N variables with M outputs, row-major.
template <int N, int M, class F, class T>
std::array<std::array<T, N>, M> jacobian(F&& f, const std::array<T, N>& x)
{
    std::array<Dual<T, N>, N> xd;
    for (int i = 0; i < N; ++i)
        xd[static_cast<std::size_t>(i)] = Dual<T, N>::variable(x[static_cast<std::size_t>(i)], i);
    std::array<Dual<T, N>, M> y = f(xd);
    std::array<std::array<T, N>, M> out;
    for (std::size_t r = 0; r < M; ++r)
        out[r] = y[r].d;
    return out;
}

} // namespace polar
