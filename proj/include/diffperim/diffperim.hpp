#pragma once

#include "diffperim/config.hpp"
#include "diffperim/diffusion1d.hpp"
#include "diffperim/error.hpp"
#include "diffperim/estimator.hpp"
#include "diffperim/euclidean_flow.hpp"
#include "diffperim/grid_field.hpp"
#include "diffperim/model_spaces.hpp"
#include "diffperim/needles.hpp"
#include "diffperim/profile1d.hpp"
#include "diffperim/quadrature.hpp"
#include "diffperim/report.hpp"
#include "diffperim/scene.hpp"
#include "diffperim/set_geometry.hpp"
#include "diffperim/space.hpp"
#include "diffperim/spectral.hpp"
