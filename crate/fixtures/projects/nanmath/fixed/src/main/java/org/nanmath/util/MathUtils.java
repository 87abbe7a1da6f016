package org.nanmath.util;

import java.util.Arrays;

/**
 * Numeric helpers.
 */
public final class MathUtils {

    private MathUtils() {
    }

    public static boolean equals(double x, double y) {
        return x == y;
    }

    public static boolean equals(float x, float y) {
        return x == y;
    }

    public static boolean equals(double[] x, double[] y) {
        if (x == null || y == null) {
            return !((x == null) ^ (y == null));
        }
        if (x.length != y.length) {
            return false;
        }
        for (int i = 0; i < x.length; ++i) {
            if (!equals(x[i], y[i])) {
                return false;
            }
        }
        return true;
    }

    public static double[] copy(double[] x) {
        return Arrays.copyOf(x, x.length);
    }

    public static double sign(double x) {
        return x > 0 ? 1.0 : x < 0 ? -1.0 : 0.0;
    }
}
