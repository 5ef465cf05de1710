#ifndef FRACCAP_FRACCAP_HPP
#define FRACCAP_FRACCAP_HPP

#include "fraccap/errors.hpp"
#include "fraccap/geometry.hpp"
#include "fraccap/quadrature.hpp"
#include "fraccap/kernels.hpp"
#include "fraccap/measures.hpp"
#include "fraccap/potentials.hpp"
#include "fraccap/simplex.hpp"
#include "fraccap/capacity.hpp"
#include "fraccap/experiments.hpp"

#endif
