#include "doctest.h"

#include "w2v/retrieval.hpp"
