#pragma once

#include "cesaro/set_expr.hpp"
#include "cesaro/dsl.hpp"
#include "cesaro/density.hpp"
#include "cesaro/constructions.hpp"
#include "cesaro/nullmod.hpp"
#include "cesaro/chains.hpp"
#include "cesaro/quotient.hpp"
#include "cesaro/kp.hpp"
#include "cesaro/io.hpp"
