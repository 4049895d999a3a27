#ifndef FSOMM_SPECFUN_HPP
#define FSOMM_SPECFUN_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace fsomm {

struct SeriesControl {
    int max_terms = 10000;
    double rel_tol = 1e-14;
    double abs_tol = 1e-300;
};

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Principal-branch log Gamma for complex argument.
std::complex<double> log_gamma(std::complex<double> z);

// Real log Gamma together with the sign of Gamma(x); valid for any
// non-pole real x. Returns ln|Gamma(x)|, sets sign to +1 or -1.
double log_gamma_signed(double x, int& sign);

// Gamma(x) for real x, allowing negative non-integer arguments.
double real_gamma(double x);

// Gauss hypergeometric 2F1(a,b;c;x) for real parameters, x < 1.
double gauss_2f1(double a, double b, double c, double x,
                 const SeriesControl& ctl = SeriesControl{});

// Legendre function of the first kind P_deg^ord(x) for x >= 1,
// real degree > -1 and integer order.
double legendre_p(double deg, int ord, double x);

// Upper incomplete gamma Gamma(p, x), p > 0, x >= 0.
double upper_incomplete_gamma(double p, double x);

// Regularized versions Q(p,x) = Gamma(p,x)/Gamma(p), P = 1 - Q.
double reg_gamma_q(double p, double x);
double reg_gamma_p(double p, double x);

} // namespace fsomm

#endif
