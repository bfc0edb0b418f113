// SPDX-License-Identifier: Apache-2.0
//! \file mmasim.hpp
//! Umbrella header.
#pragma once

#include "core.hpp"
#include "random.hpp"
#include "quad.hpp"
#include "linalg.hpp"
#include "kernels.hpp"
#include "measures.hpp"
#include "integration.hpp"
#include "conditions.hpp"
#include "levy_basis.hpp"
#include "paths.hpp"
#include "simulate.hpp"
#include "tails.hpp"
#include "pointproc.hpp"
#include "records.hpp"
#include "config.hpp"
