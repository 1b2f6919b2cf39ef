#include "cve/expsum.hpp"

#include <cmath>

#include "cve/errors.hpp"

namespace cve {

cplx eval(const ExpSum& f, double s) {
  cplx acc = 0;
  for (const auto& t : f) acc += t.amp * std::exp(t.rate * s);
  return acc;
}

double eval_real(const ExpSum& f, double s) { return eval(f, s).real(); }

ExpSum scaled(const ExpSum& f, cplx k) {
  ExpSum out = f;
  for (auto& t : out) t.amp *= k;
  return out;
}

ExpSum derivative(const ExpSum& f) {
  ExpSum out = f;
  for (auto& t : out) t.amp *= t.rate;
  return out;
}

ExpSum sum(const ExpSum& a, const ExpSum& b) {
  ExpSum out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

ExpSum combine(cplx a, const ExpSum& f, cplx b, const ExpSum& g) {
  return sum(scaled(f, a), scaled(g, b));
}

ExpSum product(const ExpSum& a, const ExpSum& b) {
  ExpSum out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b) out.push_back({x.amp * y.amp, x.rate + y.rate});
  return out;
}

cplx half_line(const ExpSum& f, const ExpSum& h) {
  cplx acc = 0;
  for (const auto& x : f)
    for (const auto& y : h) {
      cplx r = x.rate + y.rate;
      if (r.real() >= 0) throw DomainError("half_line: non-decaying integrand");
      acc += -x.amp * y.amp / r;
    }
  return acc;
}

cplx causal_double(const ExpSum& f, const ExpSum& h, const ExpSum& k) {
  // int e^{(p+r)s} int_0^s e^{(q-r)s'} = 1/((p+q)(p+r))
  cplx acc = 0;
  for (const auto& x : f)
    for (const auto& y : h)
      for (const auto& z : k) {
        cplx pq = x.rate + y.rate, pr = x.rate + z.rate;
        if (pq.real() >= 0 || pr.real() >= 0)
          throw DomainError("causal_double: non-decaying integrand");
        acc += x.amp * y.amp * z.amp / (pq * pr);
      }
  return acc;
}

cplx phi1(cplx z) {
  if (std::abs(z) < 0.5) {
    cplx acc = 0, term = 1.0;
    double fact = 1.0;
    for (int n = 0; n < 22; ++n) {
      fact *= (n + 1);
      acc += term / fact;
      term *= z;
    }
    return acc;
  }
  return (std::exp(z) - 1.0) / z;
}

cplx window_integral(cplx mu, double len) { return len * phi1(mu * len); }

cplx triangle_integral(cplx a, cplx b, double len) {
  if (std::abs(b * len) >= 0.5)
    return (window_integral(a + b, len) - window_integral(a, len)) / b;
  if (std::abs(a * len) >= 0.5)
    return (std::exp(a * len) * window_integral(b, len) - window_integral(a + b, len)) / a;
  // sum_{p,q} A^p B^q / (p! q! (q+1) (p+q+2)) L^2
  cplx A = a * len, B = b * len;
  cplx acc = 0;
  cplx ap = 1.0;
  double pf = 1.0;
  for (int p = 0; p < 18; ++p) {
    if (p > 0) {
      ap *= A;
      pf *= p;
    }
    cplx bq = 1.0;
    double qf = 1.0;
    for (int q = 0; q < 18; ++q) {
      if (q > 0) {
        bq *= B;
        qf *= q;
      }
      acc += ap * bq / (pf * qf * (q + 1.0) * (p + q + 2.0));
    }
  }
  return acc * len * len;
}

}  // namespace cve
