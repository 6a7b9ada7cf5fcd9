package rc;

import javax.servlet.http.HttpServlet;

public class Web extends HttpServlet {
    private Dao dao;
    private Gateway gw;
    private LoopWorker loop;
    private Flags flags;
    private Build build;

    public void doGet(HttpRequest req) {
        dao.read(req);
        gw.send(req);
        loop.run(req);
        flags.enable();
        build.make();
    }
}
