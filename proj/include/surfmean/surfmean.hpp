#pragma once

#include "surfmean/errors.hpp"
#include "surfmean/field.hpp"
#include "surfmean/stencil.hpp"
#include "surfmean/grid.hpp"
#include "surfmean/geometry.hpp"
#include "surfmean/warp.hpp"
#include "surfmean/resample.hpp"
#include "surfmean/representations.hpp"
#include "surfmean/reparam.hpp"
#include "surfmean/registration.hpp"
#include "surfmean/mean.hpp"
#include "surfmean/io.hpp"
