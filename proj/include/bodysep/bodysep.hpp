#pragma once

// Umbrella header for the body/background separation library.

#include "bodysep/contours.hpp"
#include "bodysep/error.hpp"
#include "bodysep/image.hpp"
#include "bodysep/image_io.hpp"
#include "bodysep/morphology.hpp"
#include "bodysep/normalization.hpp"
#include "bodysep/otsu.hpp"
#include "bodysep/phantoms.hpp"
#include "bodysep/pipeline.hpp"
#include "bodysep/volume.hpp"
