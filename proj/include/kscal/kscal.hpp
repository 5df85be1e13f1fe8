#pragma once

// Umbrella header: the whole library is header-only.

#include "kscal/bochner.hpp"
#include "kscal/certification.hpp"
#include "kscal/curvature_tensor.hpp"
#include "kscal/grassmann_min.hpp"
#include "kscal/kscalar.hpp"
#include "kscal/metric_catalog.hpp"
#include "kscal/monte_carlo.hpp"
#include "kscal/report.hpp"
#include "kscal/skew_generator.hpp"
#include "kscal/skew_normal_form.hpp"
#include "kscal/sphere_moments.hpp"
#include "kscal/tangent_plane.hpp"
#include "kscal/tensor_io.hpp"
#include "kscal/types.hpp"
#include "kscal/version.hpp"
