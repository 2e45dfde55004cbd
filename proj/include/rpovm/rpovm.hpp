#pragma once

#include "rpovm/errors.hpp"
#include "rpovm/linalg.hpp"
#include "rpovm/locc.hpp"
#include "rpovm/povm.hpp"
#include "rpovm/povm_io.hpp"
#include "rpovm/protocols.hpp"
#include "rpovm/random.hpp"
#include "rpovm/tolerances.hpp"
