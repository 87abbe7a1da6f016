package org.nanmath.shapes;

import java.util.Arrays;
import java.util.List;

public class Widget {

    private final String name;
    private final double width;
    private final double height;

    public Widget(String name, double width, double height) {
        this.name = name;
        this.width = width;
        this.height = height;
    }

    public String getName() {
        return name;
    }

    public double area() {
        return Math.abs(width * height);
    }

    public List<Double> sides() {
        return Arrays.asList(width, height);
    }
}
