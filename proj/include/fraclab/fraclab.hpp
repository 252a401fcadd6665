#pragma once

#include "fraclab/error.hpp"
#include "fraclab/parallel.hpp"
#include "fraclab/simsys.hpp"
#include "fraclab/geometry.hpp"
#include "fraclab/spatial_index.hpp"
#include "fraclab/grid.hpp"
#include "fraclab/distance_field.hpp"
#include "fraclab/scaling.hpp"
#include "fraclab/ahlfors.hpp"
#include "fraclab/uniformity.hpp"
#include "fraclab/version.hpp"
#include "fraclab/cg.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/stochastic.hpp"
