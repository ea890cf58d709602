#pragma once

#include "mcsense/bounds.hpp"
#include "mcsense/derivatives.hpp"
#include "mcsense/errors.hpp"
#include "mcsense/hilly.hpp"
#include "mcsense/io.hpp"
#include "mcsense/matrix_core.hpp"
#include "mcsense/mc_verify.hpp"
#include "mcsense/parallel.hpp"
#include "mcsense/sensitivities.hpp"
#include "mcsense/stationary.hpp"
