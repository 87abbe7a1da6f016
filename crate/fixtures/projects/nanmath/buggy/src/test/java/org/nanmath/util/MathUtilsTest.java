package org.nanmath.util;

import junit.framework.TestCase;

public final class MathUtilsTest extends TestCase {

    public MathUtilsTest(String name) {
        super(name);
    }

    public void testArrayEquals() {
        assertFalse(MathUtils.equals(new double[] { 1d }, null));
        assertTrue(MathUtils.equals(new double[] {
            Double.POSITIVE_INFINITY, Double.NEGATIVE_INFINITY, 1d, 0d
        }, new double[] {
            Double.POSITIVE_INFINITY, Double.NEGATIVE_INFINITY, 1d, 0d
        }));
    }

    public void testEquals() {
        assertTrue(MathUtils.equals(1.0, 1.0));
        assertFalse(MathUtils.equals(1.0, 2.0));
    }

    public void testSign() {
        assertEquals(1.0, MathUtils.sign(2.0), 0.0);
        assertEquals(-1.0, MathUtils.sign(-2.0), 0.0);
    }
}
