package zoo;

import java.util.List;

public class Aviary {
    private int seeds = 10;
    protected String name;

    public Aviary(String name) {
        this.name = name;
    }

    public int count() {
        return seeds;
    }

    public void nourish(int n, boolean fast) {
        seeds -= n;
    }
}
