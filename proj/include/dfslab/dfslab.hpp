// dfslab.hpp — umbrella header

#pragma once

#include "dfslab/errors.hpp"
#include "dfslab/opcore.hpp"
#include "dfslab/random.hpp"
#include "dfslab/states.hpp"
#include "dfslab/spectral.hpp"
#include "dfslab/symmetry.hpp"
#include "dfslab/duality.hpp"
#include "dfslab/fock.hpp"
#include "dfslab/dynamics.hpp"
#include "dfslab/nctorus.hpp"
#include "dfslab/report.hpp"
