#ifndef BERGMAN_DEFINING_FUNCTION_HPP
#define BERGMAN_DEFINING_FUNCTION_HPP

#include <functional>
#include <memory>
#include <string>

#include "bergman/linalg.hpp"
#include "bergman/types.hpp"

namespace bergman {

/// Real defining function rho with its Wirtinger derivatives.
///
///   grad(z)_j           = d rho / d z_j
///   hessian(z)_jk       = d^2 rho / d z_j d conj(z_k)      (Hermitian)
///   hol_hessian(z)_jk   = d^2 rho / d z_j d z_k             (symmetric)
struct DefiningFunction {
    std::string name;
    std::size_t dim = 0;
    std::function<double(const CVec&)> rho;
    std::function<CVec(const CVec&)> grad;
    std::function<CMatrix(const CVec&)> hessian;
    std::function<CMatrix(const CVec&)> hol_hessian;

    /// Real gradient (d/dx_1..d/dx_n, d/dy_1..d/dy_n) = (2 Re g, -2 Im g).
    RVec real_gradient(const CVec& z) const;

    /// Same function scaled by a positive constant.
    DefiningFunction scaled(double factor) const;
};

using DefiningFunctionPtr = std::shared_ptr<const DefiningFunction>;

/// |z - c|^2 - r^2 on C^n.
DefiningFunctionPtr sphere_rho(const CVec& center, double radius);
/// sum |z_j|^2 / a_j^2 - 1.
DefiningFunctionPtr ellipsoid_rho(const RVec& semi_axes);
/// |z|^2 + mu Re(sum z_j^2) + kappa |z|^4 - 1. Strictly psh for kappa >= 0;
/// bounded sublevel set for |mu| < 1.
DefiningFunctionPtr quartic_rho(std::size_t n, double mu, double kappa);
/// Re(z_1^2): pluriharmonic, used to exercise the not-strictly-psh path.
DefiningFunctionPtr pluriharmonic_rho(std::size_t n);
/// -Re z_1, the local defining function of the flat face of the half-ball.
DefiningFunctionPtr half_space_rho(std::size_t n);

}  // namespace bergman

#endif
