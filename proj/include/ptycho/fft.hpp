#pragma once

#include "ptycho/field.hpp"

namespace ptycho {

// Unitary 2-D DFT (scaled by 1/sqrt(rows*cols)). dft2 uses the exp(-2*pi*i*k*x/N)
// kernel, idft2 the conjugate one; the pair are exact mutual inverses.
ComplexField2D dft2(const ComplexField2D& f);
ComplexField2D idft2(const ComplexField2D& f);

void dft2_inplace(ComplexField2D& f);
void idft2_inplace(ComplexField2D& f);

}  // namespace ptycho
