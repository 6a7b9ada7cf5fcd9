package rc;

import com.fasterxml.jackson.databind.ObjectMapper;

public class Build {
    private ObjectMapper shared;
    private RESTClient rest;

    public Build() {
        this.shared = new ObjectMapper();
    }

    public void make() {
        this.rest = new RESTClient("http://build:7000");
        rest.push();
    }
}
