#include "doctest.h"

#include "w2v/synth.hpp"
